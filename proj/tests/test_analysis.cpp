#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "linsys/analysis.hpp"
#include "linsys/errors.hpp"
#include "linsys/theory.hpp"
#include "oracles.hpp"

using namespace linsys;

namespace {

oracle::Field to_map(const LatticeField& f) {
  oracle::Field m;
  for (const auto& [x, v] : f) m[x.coords()] = v;
  return m;
}

std::vector<oracle::Atom> to_atoms(const KernelDistribution& dist) {
  std::vector<oracle::Atom> out;
  for (const auto& a : dist.atoms()) {
    oracle::Field xi = to_map(a.vector);
    if (xi.empty()) xi[Site(dist.dim()).coords()] = 0.0;
    out.push_back({a.prob, xi});
  }
  return out;
}

MassField random_rho(int d, int radius, int n, std::mt19937_64& eng) {
  std::uniform_int_distribution<int> c(-radius, radius);
  std::uniform_real_distribution<double> v(0.01, 1.0);
  MassField rho(d);
  for (int i = 0; i < n; ++i) {
    Site x(d);
    for (int a = 0; a < d; ++a) x[a] = c(eng);
    rho.add(x, v(eng));
  }
  return rho.scaled(1.0 / rho.sum());
}

}  // namespace

TEST_CASE("overlap functional") {
  CHECK(overlap_functional_S(delta0(2), delta0(2)) == 1.0);
  const MassField u(1, {{Site{0}, 0.5}, {Site{1}, 0.5}});
  CHECK(overlap_functional_S(u, delta0(1)) == doctest::Approx(0.5));
  std::mt19937_64 eng(1);
  const MassField rho = random_rho(1, 15, 20, eng);
  const MassField g = g_n(transition_p(make_bcpp(1, 1.0).mean()), 3);
  CHECK(overlap_functional_S(rho, g) <= g.sum() * rho.l2_norm_squared() * (1 + 1e-14));
  CHECK(overlap_functional_S(rho, g) == doctest::Approx(oracle::bilinear(to_map(g), to_map(rho), to_map(rho))));
}

TEST_CASE("exact drift matches the explicit J construction") {
  std::mt19937_64 eng(17);
  for (int d = 1; d <= 3; ++d) {
    for (double lambda : {0.4, 1.3}) {
      const auto dist = make_bcpp(d, lambda);
      const LatticeField g = g_n(transition_p(dist.mean()), 2);
      for (int rep = 0; rep < 4; ++rep) {
        const MassField rho = random_rho(d, 2, 6, eng);
        const DriftBreakdown b = exact_drift(rho, dist, g);
        const oracle::Drift o = oracle::drift(to_map(rho), to_atoms(dist), to_map(g));
        CHECK(b.drift == doctest::Approx(o.drift).epsilon(1e-12).scale(1.0));
        CHECK(b.u_term == doctest::Approx(o.u).epsilon(1e-12).scale(1.0));
        CHECK(b.v_term == doctest::Approx(o.v).epsilon(1e-12).scale(1.0));
        CHECK(b.w_term == doctest::Approx(o.w).epsilon(1e-12).scale(1.0));
        CHECK(b.s_value == doctest::Approx(o.s).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("drift at a single particle by hand") {
  // rho = delta_0, g = delta_0, BCPP(d, lambda). Branching onto e gives
  // Jbar = (delta_0 + delta_e)/2, F = -1/2; the zero atom has m = 0.
  for (int d = 1; d <= 3; ++d) {
    const double lambda = 0.75;
    const auto dist = make_bcpp(d, lambda);
    const DriftBreakdown b = exact_drift(delta0(d), dist, delta0(d));
    const double q = lambda / (2 * d * lambda + 1);
    CHECK(b.drift == doctest::Approx(2 * d * q * -0.5));
    CHECK(b.extinction_mass == doctest::Approx(1.0 / (2 * d * lambda + 1)));
    // U: J = delta_0 + delta_e gives 2 - 1; J = 0 gives -1.
    CHECK(b.u_term == doctest::Approx(2 * d * q * 1.0 - (1 - 2 * d * q)));
  }
}

TEST_CASE("closed forms for U and W and the lower bound") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = 1 + rep % 3;
    std::vector<KernelAtom> atoms;
    double left = 1.0;
    for (int a = 0; a < 3; ++a) {
      MassField v(d);
      for (const Site& x : l1_ball(d, 1))
        if (u(eng) < 0.6) v.set(x, 2.0 * u(eng));
      for (int axis = 0; axis < d; ++axis) v.add(Site::unit(d, axis, a % 2 ? -1 : 1), 0.1 + u(eng));
      const double p = a == 2 ? left : left * (0.2 + 0.5 * u(eng));
      left -= p;
      atoms.push_back(KernelAtom{p, v, 0.0});
    }
    atoms.push_back(KernelAtom{0.1, MassField(d), 0.0});
    for (auto& a : atoms) a.prob /= 1.1;
    const auto dist = make_custom(d, atoms);
    const LatticeField g = g_n(transition_p(dist.mean()), 1 + rep % 4);
    const MassField rho = random_rho(d, 3, 8, eng);
    const DriftBreakdown b = exact_drift(rho, dist, g);
    const DriftClosedForms c = drift_closed_forms(rho, dist, g);
    CHECK(std::abs(b.u_term - c.u_closed) < 1e-12);
    CHECK(std::abs(b.w_term - c.w_closed) < 1e-12);
    CHECK(b.lower_bound_lhs - b.lower_bound_rhs >= -1e-12);
    CHECK(b.pointwise_margin >= -1e-12);
    CHECK(std::abs(b.v_term) <= v_term_constant(dist, g) * std::pow(b.overlap, 1.5) * (1 + 1e-12));
  }
}

TEST_CASE("drift witness constants") {
  const auto dist = make_bcpp(1, 1.0);
  const WitnessSearch w = find_witness(dist, 100);
  REQUIRE(w.n);
  const LatticeField g = g_n(transition_p(dist.mean()), *w.n);
  const DriftWitness c = drift_positivity_witness(dist, g);
  CHECK(c.c1 > 0.0);
  CHECK(c.c2 > 0.0);
  CHECK(std::isfinite(c.c2));
  CHECK_THROWS_AS(drift_positivity_witness(dist, delta0(1)), InvalidParameter);
  // c1 R - c2 R^{3/2} -> 0 as R -> 0.
  const double r = 1e-12;
  const double ratio = (c.c1 * r - c.c2 * std::pow(r, 1.5)) / (c.c1 * r);
  CHECK(ratio > 0.99);
  CHECK(ratio <= 1.0);
}

TEST_CASE("drift audit over live configurations") {
  const auto dist = make_bcpp(1, 1.0);
  const WitnessSearch w = find_witness(dist, 100);
  const LatticeField g = g_n(transition_p(dist.mean()), *w.n);
  std::vector<MassField> configs;
  std::vector<double> ts;
  for (int i = 1; i <= 20; ++i) ts.push_back(0.5 * i);
  RunOptions opt;
  opt.on_sample = [&](const Configuration& c, const Observables&) {
    if (!c.extinct()) configs.push_back(c.rho());
  };
  for (std::uint64_t s = 0; configs.size() < 2000; ++s) run(dist, Horizon{10.0}, ts, derive_seed(31, s), opt);
  AuditOptions ao;
  ao.large_config_sites = 4;
  const DriftAudit a = audit_drift(dist, g, configs, ao);
  CHECK(a.configs == configs.size());
  CHECK(a.violations == 0);
  CHECK(a.max_f_ratio_global <= 1.0 + 1e-12);
  CHECK(a.max_f_ratio_local <= 1.0 + 1e-12);
  CHECK(a.large_configs > 0);
}

TEST_CASE("F terms stay within their bounds") {
  std::mt19937_64 eng(9);
  const auto dist = make_bcpp(2, 0.9);
  const LatticeField g = g_n(transition_p(dist.mean()), 4);
  const double cf = f_bound_constant(dist, g);
  for (int rep = 0; rep < 20; ++rep) {
    const MassField rho = random_rho(2, 3, 10, eng);
    for (const FTerm& f : f_terms(rho, dist, g)) {
      CHECK(std::abs(f.value) <= 2.0 * g.l1_norm() * (1 + 1e-12));
      if (f.rho_z <= 0.5) CHECK(std::abs(f.value) <= cf * f.rho_z);
    }
  }
}

TEST_CASE("Hausdorff-Young") {
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const MassField rho = random_rho(2, 4, 9, eng);
  const HausdorffYoung id = hausdorff_young_check(delta0(2), rho);
  CHECK(id.lhs == doctest::Approx(id.rhs).epsilon(1e-15));
  const MassField g = g_n(transition_p(make_bcpp(2, 1.0).mean()), 3);
  const HausdorffYoung gr = hausdorff_young_check(g, rho);
  CHECK(gr.holds());
  CHECK(inner(convolve(g, rho), rho) <= g.l1_norm() * rho.l2_norm_squared() * (1 + 1e-14));
  for (int rep = 0; rep < 200; ++rep) {
    LatticeField f(2), h(2);
    for (int i = 0; i < 6; ++i) {
      f.add(Site{static_cast<int>(4 * u(eng)), static_cast<int>(4 * u(eng))}, u(eng));
      h.add(Site{static_cast<int>(4 * u(eng)), static_cast<int>(4 * u(eng))}, u(eng));
    }
    const HausdorffYoung r = hausdorff_young_check(f, h);
    CHECK(r.lhs - r.rhs <= 1e-12);
  }
}
