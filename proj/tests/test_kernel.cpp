#include <doctest.h>

#include <cmath>
#include <vector>

#include "linsys/errors.hpp"
#include "linsys/kernel.hpp"

using namespace linsys;

namespace {

MassField nn_table(int d, double mass_each) {
  MassField k(d);
  for (int a = 0; a < d; ++a)
    for (int s : {1, -1}) k.set(Site::unit(d, a, s), mass_each);
  return k;
}

// E[(xi - delta_0)_x (xi - delta_0)_y] summed over the atoms by hand.
double beta_by_hand(const KernelDistribution& dist, const Site& x, const Site& y) {
  double s = 0.0;
  for (const auto& a : dist.atoms()) {
    const double ax = a.vector(x) - (x.is_origin() ? 1.0 : 0.0);
    const double ay = a.vector(y) - (y.is_origin() ? 1.0 : 0.0);
    s += a.prob * ax * ay;
  }
  return s;
}

}  // namespace

TEST_CASE("BCPP atoms in d = 1") {
  const auto dist = make_bcpp(1, 1.0);
  REQUIRE(dist.atom_count() == 3);
  double total = 0.0;
  int zero_atoms = 0;
  for (const auto& a : dist.atoms()) {
    CHECK(a.prob == doctest::Approx(1.0 / 3.0));
    total += a.prob;
    if (a.vector.empty()) ++zero_atoms;
    else {
      CHECK(a.vector(Site{0}) == 1.0);
      CHECK(a.vector.size() == 2);
    }
  }
  CHECK(zero_atoms == 1);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("BCPP in d = 2 with lambda 1/2") {
  const auto dist = make_bcpp(2, 0.5);
  CHECK(dist.atom_count() == 5);
  for (const auto& a : dist.atoms())
    if (a.vector.empty()) CHECK(a.prob == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("BCPP mean kernel") {
  const auto k = make_bcpp(1, 1.0).mean();
  CHECK(k(Site{0}) == doctest::Approx(2.0 / 3.0));
  CHECK(k(Site{1}) == doctest::Approx(1.0 / 3.0));
  CHECK(k(Site{-1}) == doctest::Approx(1.0 / 3.0));
  for (int d = 1; d <= 4; ++d)
    for (double lambda : {0.1, 0.5, 1.0, 3.0}) {
      const auto dist = make_bcpp(d, lambda);
      double norm = 0.0;
      for (const auto& a : dist.atoms()) norm += a.prob * a.vector.sum();
      CHECK(dist.k_norm() == doctest::Approx(norm).epsilon(1e-14));
      CHECK(dist.k_norm() == doctest::Approx(4.0 * d * lambda / (2.0 * d * lambda + 1.0)).epsilon(1e-14));
    }
}

TEST_CASE("bad parameters are rejected") {
  CHECK_THROWS_AS(make_bcpp(1, 0.0), InvalidParameter);
  CHECK_THROWS_AS(make_bcpp(1, -1.0), InvalidParameter);
  CHECK_THROWS_AS(make_bcpp(0, 1.0), InvalidParameter);
  const MassField k = nn_table(1, 0.5);
  const std::vector<WeightAtom> w_one{{1.0, 1.0}};
  CHECK_THROWS_AS(make_potlatch(k, w_one), InvalidParameter);
  const std::vector<WeightAtom> w_low{{0.5, 0.0}, {0.5, 1.8}};
  try {
    make_potlatch(k, w_low);
    FAIL("mean-0.9 W accepted");
  } catch (const InvalidParameter& e) {
    CHECK(std::string(e.what()).find("mean one") != std::string::npos);
  }
}

TEST_CASE("potlatch atoms and moments") {
  const MassField k = nn_table(1, 1.0);
  const std::vector<WeightAtom> w{{0.5, 0.0}, {0.5, 2.0}};
  const auto dist = make_potlatch(k, w);
  REQUIRE(dist.atom_count() == 2);
  bool saw_zero = false, saw_double = false;
  for (const auto& a : dist.atoms()) {
    if (a.vector.empty()) saw_zero = true;
    if (a.vector(Site{1}) == 2.0 && a.vector(Site{-1}) == 2.0 && a.vector.size() == 2) saw_double = true;
  }
  CHECK(saw_zero);
  CHECK(saw_double);
  for (const auto& [x, v] : k) CHECK(dist.mean()(x) == doctest::Approx(v).epsilon(1e-12));

  MassField k12(1);
  k12.set(Site{1}, 0.6);
  k12.set(Site{-1}, 0.6);
  const std::vector<WeightAtom> w2{{0.5, 0.5}, {0.5, 1.5}};
  const auto d2 = make_potlatch(k12, w2);
  CHECK(d2.potlatch()->w_second_moment == doctest::Approx(1.25));
  CHECK(d2.k_norm() == doctest::Approx(1.2));
}

TEST_CASE("custom kernels and the standing assumptions") {
  std::vector<KernelAtom> identity{{1.0, MassField(1, {{Site{1}, 1.0}}), 0.0}};
  CHECK_THROWS_AS(make_custom(1, identity), AssumptionViolation);
  try {
    make_custom(1, identity);
  } catch (const AssumptionViolation& e) {
    CHECK(e.assumption() == "mass_not_conserved");
  }

  std::vector<KernelAtom> no_basis{{0.5, MassField(1), 0.0}, {0.5, delta0(1).scaled(2.0), 0.0}};
  try {
    make_custom(1, no_basis);
    FAIL("kernel without a basis accepted");
  } catch (const AssumptionViolation& e) {
    CHECK(e.assumption() == "truly_d_dimensional");
  }

  std::vector<KernelAtom> collinear{{0.5, MassField(2, {{Site{1, 0}, 1.0}}), 0.0},
                                    {0.5, MassField(2, {{Site{2, 0}, 1.5}}), 0.0}};
  const auto lenient = make_custom(2, collinear, AssumptionPolicy::warn);
  CHECK_FALSE(lenient.assumptions().truly_d_dimensional);
  CHECK(lenient.assumptions().mean_support_rank == 1);

  // BCPP re-entered by hand.
  const auto ref = make_bcpp(2, 0.7);
  std::vector<KernelAtom> manual;
  for (const auto& a : ref.atoms()) manual.push_back(KernelAtom{a.prob, a.vector, 0.0});
  const auto copy = make_custom(2, manual);
  CHECK(copy.mean() == ref.mean());
  CHECK(copy.k_norm() == doctest::Approx(ref.k_norm()).epsilon(1e-15));
  CHECK(beta_matrix(copy).entries() == beta_matrix(ref).entries());

  std::vector<KernelAtom> off{{0.3, delta0(1), 0.0}, {0.3, MassField(1, {{Site{1}, 2.0}}), 0.0}};
  CHECK_THROWS_AS(make_custom(1, off), InvalidParameter);
}

TEST_CASE("validate on BCPP and on bad supports") {
  for (int d = 1; d <= 3; ++d) CHECK(validate(make_bcpp(d, 0.8)).ok());
  std::vector<KernelAtom> atoms{{0.5, MassField(2, {{Site{1, 0}, 1.0}, {Site{2, 0}, 1.0}}), 0.0},
                                {0.5, MassField(2), 0.0}};
  const AssumptionReport r = validate(2, atoms);
  CHECK_FALSE(r.truly_d_dimensional);
  std::vector<KernelAtom> unit{{1.0, MassField(1, {{Site{1}, 1.0}}), 0.0}};
  CHECK_FALSE(validate(1, unit).mass_not_conserved);
}

TEST_CASE("sampling frequencies") {
  const auto dist = make_bcpp(1, 1.0);
  RandomStream rng(99);
  const int n = 300000;
  int zero = 0;
  for (int i = 0; i < n; ++i)
    if (sample(dist, rng).empty()) ++zero;
  const double sigma = std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
  CHECK(std::abs(zero - n / 3.0) < 4.0 * sigma);

  const std::vector<WeightAtom> w{{0.5, 0.0}, {0.5, 2.0}};
  const auto pot = make_potlatch(nn_table(1, 1.0), w);
  std::vector<int> counts(pot.atom_count(), 0);
  for (int i = 0; i < n; ++i) ++counts[sample_atom(pot, rng)];
  for (int c : counts) CHECK(std::abs(c - n / 2.0) < 4.0 * std::sqrt(n * 0.25));

  std::vector<KernelAtom> single{{1.0, MassField(1, {{Site{0}, 0.5}, {Site{1}, 1.0}}), 0.0}};
  const auto one = make_custom(1, single);
  for (int i = 0; i < 100; ++i) CHECK(sample_atom(one, rng) == 0);
}

TEST_CASE("beta tables") {
  const double lambda = 0.8;
  for (int d = 1; d <= 3; ++d) {
    const auto dist = make_bcpp(d, lambda);
    const BetaTable beta = beta_matrix(dist);
    CHECK(beta.is_symmetric());
    for (const Site& x : l1_ball(d, 2))
      for (const Site& y : l1_ball(d, 2)) {
        double expect = 0.0;
        if (x == y) expect = ((x.is_origin() ? 1.0 : 0.0) + (x.l1_norm() == 1 ? lambda : 0.0)) / (2 * d * lambda + 1);
        CHECK(beta(x, y) == doctest::Approx(expect).epsilon(1e-14).scale(1.0));
      }
  }

  const MassField k = MassField(2, {{Site{1, 0}, 0.4}, {Site{0, 1}, 0.3}, {Site{0, 0}, 0.2}, {Site{-1, -1}, 0.5}});
  const std::vector<WeightAtom> w{{0.2, 0.0}, {0.5, 1.2}, {0.3, 1.3333333333333333}};
  const auto pot = make_potlatch(k, w);
  const BetaTable pb = beta_matrix(pot);
  const double w2 = pot.potlatch()->w_second_moment;
  for (const Site& x : l1_ball(2, 2))
    for (const Site& y : l1_ball(2, 2)) {
      const double dx = x.is_origin() ? 1.0 : 0.0, dy = y.is_origin() ? 1.0 : 0.0;
      const double kx = pot.mean()(x), ky = pot.mean()(y);
      const double expect = w2 * kx * ky - kx * dy - ky * dx + dx * dy;
      CHECK(pb(x, y) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
      CHECK(pb(x, y) == doctest::Approx(beta_by_hand(pot, x, y)).epsilon(1e-12).scale(1.0));
    }
  double second = 0.0;
  for (const auto& a : pot.atoms()) second += a.prob * (a.total - 1.0) * (a.total - 1.0);
  CHECK(pb.total() == doctest::Approx(second).epsilon(1e-12));
  CHECK(pb.total() >= 0.0);
}

TEST_CASE("log-moment margin") {
  for (int d = 1; d <= 3; ++d)
    for (double lambda : {0.05, 0.3, 1.0}) {
      const double expect = -(2 * d * lambda - 1) / (2 * d * lambda + 1);
      CHECK(log_moment_margin(make_bcpp(d, lambda)) == doctest::Approx(expect).epsilon(1e-13));
    }
  for (int d = 1; d <= 3; ++d) {
    const double c = 1.0 / (2.0 * d);
    CHECK(log_moment_margin(make_bcpp(d, c * (1 - 1e-6))) > 0.0);
    CHECK(log_moment_margin(make_bcpp(d, c * (1 + 1e-6))) < 0.0);
  }
  std::vector<KernelAtom> det{{1.0, MassField(1, {{Site{0}, 1.0}, {Site{1}, 1.0}}), 0.0}};
  CHECK(log_moment_margin(make_custom(1, det)) == doctest::Approx(-1.0));
  const std::vector<WeightAtom> w{{0.5, 0.0}, {0.5, 2.0}};
  const auto pot = make_potlatch(nn_table(1, 1.0), w);
  CHECK(log_moment_margin(pot) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
}
