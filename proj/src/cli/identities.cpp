#include "linsys/cli/identities.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "linsys/analysis.hpp"
#include "linsys/rng.hpp"

namespace linsys::cli {

namespace {

IdentityCheck make(std::string name, double residual, double tol, std::string note = {}) {
  IdentityCheck c;
  c.name = std::move(name);
  c.residual = residual;
  c.tolerance = tol;
  c.passed = residual <= tol;
  c.note = std::move(note);
  return c;
}

IdentityCheck skip(std::string name, std::string note) {
  IdentityCheck c;
  c.name = std::move(name);
  c.skipped = true;
  c.note = std::move(note);
  return c;
}

MassField random_density(int d, RandomStream& rng) {
  const std::vector<Site> ball = l1_ball(d, d == 1 ? 6 : 3);
  MassField rho(d);
  const std::size_t n = 1 + rng.index(std::min<std::size_t>(12, ball.size()));
  for (std::size_t i = 0; i < n; ++i) rho.add(ball[rng.index(ball.size())], 0.05 + rng.uniform());
  return rho.scaled(1.0 / rho.sum());
}

LatticeField random_signed(int d, RandomStream& rng) {
  const std::vector<Site> ball = l1_ball(d, 3);
  LatticeField f(d);
  const std::size_t n = 1 + rng.index(10);
  for (std::size_t i = 0; i < n; ++i) f.add(ball[rng.index(ball.size())], 2.0 * rng.uniform() - 1.0);
  return f;
}

void green_checks(const KernelDistribution& dist, const IdentityOptions& opt, std::vector<IdentityCheck>& out) {
  const int d = dist.dim();
  const MassField& k = dist.mean();
  const int r = 3;
  const std::vector<Site> window = l1_ball(d, r);
  const std::vector<Site> wide = l1_ball(d, r + dist.r_K());

  const GreenValues gf = green_values(k, wide, GreenMethod::fourier, opt.green);
  LatticeField G(d);
  for (std::size_t i = 0; i < gf.sites.size(); ++i) G.set(gf.sites[i], gf.values[i]);
  double res = 0.0;
  for (const Site& x : window) res = std::max(res, std::abs(symmetric_generator(k, G, x) + (x.is_origin() ? 1.0 : 0.0)));
  out.push_back(make("green_identity", res, 1e-8, "L_S G = -delta_0 on |x| <= 3"));

  const GreenValues gs = green_values(k, window, GreenMethod::series, opt.green);
  double diff = 0.0;
  for (const Site& x : window) diff = std::max(diff, std::abs(gs.at(x) - gf.at(x)));
  out.push_back(make("green_series_vs_fourier", diff, 1e-6, gs.fell_back ? "series fell back to Fourier" : ""));

  if (const auto lambda = dist.bcpp_lambda()) {
    const double closed = (2.0 * d * *lambda + 1.0) / (2.0 * d * *lambda) / (1.0 - srw_return_probability(d));
    out.push_back(make("bcpp_green_closed_form", std::abs(closed - gf.at(Site(d))), 1e-4));
  } else {
    out.push_back(skip("bcpp_green_closed_form", "kernel is not a BCPP law"));
  }

  if (dist.potlatch()) {
    const PotlatchStatistic ps = potlatch_statistic(dist, opt.green);
    out.push_back(make("potlatch_statistic", std::abs(ps.direct - ps.identity), 1e-8));
  } else {
    out.push_back(skip("potlatch_statistic", "kernel is not a potlatch law"));
  }
}

}  // namespace

std::vector<IdentityCheck> run_identities(const KernelDistribution& dist, const IdentityOptions& opt) {
  std::vector<IdentityCheck> out;
  const int d = dist.dim();
  RandomStream rng(opt.seed);

  if (d >= 3) {
    green_checks(dist, opt, out);
  } else {
    for (const char* name : {"green_identity", "green_series_vs_fourier", "bcpp_green_closed_form", "potlatch_statistic"})
      out.push_back(skip(name, "Green function diverges for d <= 2"));
  }

  const JumpLaw p = transition_p(dist.mean());
  {
    const LatticeField pm = p.probs - delta0(d);
    LatticeField pn = delta0(d);
    double res = 0.0;
    for (int n = 0; n <= 6; ++n) {
      pn = convolve(pn, p.probs);
      const LatticeField lhs = convolve(g_n(p, n), pm);
      const LatticeField rhs = pn - delta0(d);
      res = std::max(res, (lhs - rhs).max_abs());
    }
    out.push_back(make("g_n_identity", res, 1e-12, "g_n*(p - delta_0) = p_{n+1} - delta_0 for n <= 6"));
  }

  {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const HausdorffYoung hy = hausdorff_young_check(random_signed(d, rng), random_signed(d, rng));
      worst = std::max(worst, hy.holds() ? 0.0 : (hy.lhs - hy.rhs) / hy.rhs);
    }
    out.push_back(make("hausdorff_young", worst, 0.0, "200 random pairs"));
  }

  const WitnessSearch ws = find_witness(dist, 50);
  const int n = ws.n ? *ws.n : 3;
  const std::string g_note = ws.n ? fmt::format("g = g_{} (witness)", n) : "no witness up to n = 50, g = g_3";
  const LatticeField g = g_n(p, n);
  BetaTable beta = beta_matrix(dist);
  if (opt.corrupt_beta) beta.add(Site(d), Site(d), 0.25);

  double u_res = 0.0, w_res = 0.0, lb_slack = 0.0, pw_slack = 0.0;
  for (int i = 0; i < opt.random_instances; ++i) {
    const MassField rho = random_density(d, rng);
    const DriftBreakdown b = exact_drift(rho, dist, g);
    const DriftClosedForms c = drift_closed_forms(rho, dist, g, beta);
    u_res = std::max(u_res, std::abs(b.u_term - c.u_closed));
    w_res = std::max(w_res, std::abs(b.w_term - c.w_closed));
    lb_slack = std::max(lb_slack, b.lower_bound_rhs - b.lower_bound_lhs);
    pw_slack = std::max(pw_slack, -b.pointwise_margin);
  }
  out.push_back(make("u_term_closed_form", u_res, 1e-12, g_note));
  out.push_back(make("w_term_closed_form", w_res, 1e-12, g_note));
  out.push_back(make("drift_lower_bound", lb_slack, 1e-12, "U - 2W >= (sum g beta - 2(|k| - k_0)) R"));
  out.push_back(make("drift_pointwise_bound", pw_slack, 1e-12, "F >= U - 2V - 2W summand-wise"));
  return out;
}

bool print_identities(std::ostream& os, const std::vector<IdentityCheck>& checks) {
  bool ok = true;
  for (const IdentityCheck& c : checks) {
    if (c.skipped) {
      os << fmt::format("SKIP {:<26} {}\n", c.name, c.note);
      continue;
    }
    ok = ok && c.passed;
    os << fmt::format("{} {:<26} max residual {:.3e} (tol {:.1e}){}{}\n", c.passed ? "PASS" : "FAIL", c.name,
                      c.residual, c.tolerance, c.note.empty() ? "" : "  ", c.note);
  }
  return ok;
}

}  // namespace linsys::cli
