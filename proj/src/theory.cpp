#include "linsys/theory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "linsys/errors.hpp"
#include "linsys/lattice_box.hpp"

namespace linsys {

namespace {

constexpr int kConsecutiveSmall = 5;
constexpr int kMinSeriesPoints = 22;

std::vector<Site> sorted_unique(std::span<const Site> xs) {
  std::vector<Site> out(xs.begin(), xs.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MassField symmetrized(const MassField& k) {
  MassField s(k.dim());
  for (const auto& [x, v] : k) {
    s.add(x, 0.5 * v);
    s.add(-x, 0.5 * v);
  }
  return s;
}

int linf_radius(std::span<const std::pair<Site, double>> p) {
  int r = 0;
  for (const auto& [y, w] : p) r = std::max(r, y.linf_norm());
  return r;
}

struct RichardsonFit {
  std::vector<double> values;
  double spread = std::numeric_limits<double>::infinity();
};

/// Least-squares fit T(n) = G - sum_j a_j n^{-(d/2 - 1 + j)} over the tail of
/// the even partial sums, for several term counts; the spread between fits is
/// the error estimate.
RichardsonFit richardson(int d, const std::vector<double>& ns, const std::vector<std::vector<double>>& partial) {
  RichardsonFit fit;
  const std::size_t m = ns.size();
  const std::size_t width = partial.empty() ? 0 : partial.front().size();
  const double lead = 0.5 * d - 1.0;
  const double n_ref = m ? ns.back() : 1.0;
  // Nodes from the last third of the sequence, evenly spread, so the fit
  // stays well conditioned as the order grows.
  std::size_t lo = 0;
  while (lo < m && ns[lo] < n_ref / 3.0) ++lo;
  std::vector<std::vector<double>> estimates;
  for (int terms : {7, 8, 9}) {
    const std::size_t rows = static_cast<std::size_t>(2 * terms + 4);
    const std::size_t first = std::min(lo, m >= rows ? m - rows : 0);
    if (m - first < rows) continue;
    std::vector<std::size_t> pick(rows);
    for (std::size_t i = 0; i < rows; ++i)
      pick[i] = first + static_cast<std::size_t>(std::llround(static_cast<double>(i) * (m - 1 - first) / (rows - 1)));
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows), terms + 1);
    Eigen::MatrixXd rhs(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows; ++i) {
      const double n = ns[pick[i]];
      a(static_cast<Eigen::Index>(i), 0) = 1.0;
      for (int j = 0; j < terms; ++j)
        a(static_cast<Eigen::Index>(i), j + 1) = -std::pow(n / n_ref, -(lead + j));
      for (std::size_t q = 0; q < width; ++q)
        rhs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = partial[pick[i]][q];
    }
    const Eigen::MatrixXd sol = a.colPivHouseholderQr().solve(rhs);
    std::vector<double> est(width);
    for (std::size_t q = 0; q < width; ++q) est[q] = sol(0, static_cast<Eigen::Index>(q));
    estimates.push_back(std::move(est));
  }
  if (estimates.size() < 2) return fit;
  const std::size_t mid = estimates.size() / 2;
  fit.values = estimates[mid];
  fit.spread = 0.0;
  for (const auto& e : estimates)
    for (std::size_t q = 0; q < width; ++q) fit.spread = std::max(fit.spread, std::abs(e[q] - fit.values[q]));
  return fit;
}

bool series_green(const JumpLaw& p, const std::vector<Site>& xs, const GreenOptions& opt, GreenValues& out) {
  const auto entries = p.entries();
  const int pr = linf_radius(entries);
  int rx = 0;
  for (const Site& x : xs) rx = std::max(rx, x.linf_norm());
  double sigma = 0.0;
  for (int j = 0; j < p.d; ++j) {
    double v = 0.0;
    for (const auto& [y, w] : entries) v += w * y[j] * y[j];
    sigma = std::max(sigma, std::sqrt(v));
  }
  DenseBox cur(p.d, 0);
  cur.at(Site(p.d)) = 1.0;
  std::vector<double> partial(xs.size(), 0.0);
  for (std::size_t q = 0; q < xs.size(); ++q) partial[q] = cur(xs[q]);

  std::vector<double> ns;
  std::vector<std::vector<double>> tail;
  RichardsonFit fit;
  int small = 0;
  int n = 0;
  int target = opt.series_order;
  for (;;) {
    if (n >= target) {
      if (static_cast<int>(ns.size()) >= kMinSeriesPoints) fit = richardson(p.d, ns, tail);
      if (fit.spread < opt.series_tolerance || target >= opt.max_series_order) break;
      target = std::min(opt.max_series_order, target + opt.series_order / 2);
    }
    // Mass beyond tail_sigmas standard deviations is negligible at double precision.
    const int keep = static_cast<int>(std::ceil(opt.tail_sigmas * sigma * std::sqrt(n + 1.0))) + rx + pr;
    if (DenseBox::cells_for(p.d, std::min(cur.radius() + pr, keep)) > opt.cell_cap) {
      if (n < target && static_cast<int>(ns.size()) >= kMinSeriesPoints) fit = richardson(p.d, ns, tail);
      break;
    }
    cur = cur.convolve(entries, keep);
    ++n;
    double inc = 0.0;
    for (std::size_t q = 0; q < xs.size(); ++q) {
      const double v = cur(xs[q]);
      partial[q] += v;
      inc += v;
    }
    small = inc < opt.increment_tolerance ? small + 1 : 0;
    if (small >= kConsecutiveSmall) {
      out.values = partial;
      out.error_estimate = inc;
      out.order = n;
      for (double& v : out.values) v /= p.rate();
      out.error_estimate /= p.rate();
      return true;
    }
    if (n % 2 == 0) {
      ns.push_back(n);
      tail.push_back(partial);
    }
  }
  out.order = n;
  if (!(fit.spread < opt.series_tolerance)) return false;
  out.values = fit.values;
  for (double& v : out.values) v /= p.rate();
  out.error_estimate = fit.spread / p.rate();
  return true;
}

bool fourier_green(const JumpLaw& p, const std::vector<Site>& xs, const GreenOptions& opt, GreenValues& out) {
  const auto entries = p.entries();
  std::vector<Site> support;
  for (const auto& [y, w] : entries) support.push_back(y);
  if (!generates_lattice(p.d, support)) return false;
  const FourierResult r = lattice_green_integral(p.d, entries, xs, opt.fourier);
  out.values = r.values;
  for (double& v : out.values) v /= p.rate();
  out.error_estimate = r.error_estimate / p.rate();
  out.order = r.torus_nodes;
  return true;
}

MassField srw_law(int d) {
  MassField k(d);
  for (int a = 0; a < d; ++a)
    for (int s : {1, -1}) k.set(Site::unit(d, a, s), 1.0 / (2.0 * d));
  return k;
}

}  // namespace

std::vector<std::pair<Site, double>> JumpLaw::entries() const {
  std::vector<std::pair<Site, double>> out;
  for (const auto& [x, v] : probs) out.emplace_back(x, v);
  return out;
}

JumpLaw transition_p(const MassField& k) {
  const int d = k.dim();
  JumpLaw law;
  law.d = d;
  law.k_norm = k.sum();
  law.k0 = k(Site(d));
  const double rate = law.k_norm - law.k0;
  if (!(rate > 0.0)) throw DegenerateKernel("|k| - k_0 must be positive");
  law.probs = MassField(d);
  for (const auto& [x, v] : k) {
    if (x.is_origin()) continue;
    law.probs.add(x, 0.5 * v / rate);
    law.probs.add(-x, 0.5 * v / rate);
  }
  return law;
}

double characteristic_function(const JumpLaw& p, std::span<const double> theta) {
  double s = 0.0;
  for (const auto& [y, w] : p.probs) {
    double phase = 0.0;
    for (int j = 0; j < p.d; ++j) phase += y[j] * theta[static_cast<std::size_t>(j)];
    s += w * std::cos(phase);
  }
  return s;
}

MassField g_n(const JumpLaw& p, int n) {
  if (n < 0) throw InvalidParameter("n must be nonnegative");
  const auto entries = p.entries();
  DenseBox cur(p.d, 0);
  cur.at(Site(p.d)) = 1.0;
  MassField g = delta0(p.d);
  for (int m = 1; m <= n; ++m) {
    cur = cur.convolve(entries);
    g += cur.to_field();
  }
  return g;
}

double GreenValues::at(const Site& x) const {
  auto it = std::lower_bound(sites.begin(), sites.end(), x);
  if (it == sites.end() || !(*it == x)) throw InvalidParameter("Green function not evaluated at " + x.str());
  return values[static_cast<std::size_t>(it - sites.begin())];
}

GreenValues green_values(const MassField& k, std::span<const Site> xs, GreenMethod method,
                         const GreenOptions& options) {
  if (k.dim() <= 2) throw DivergentGreenFunction("the Green function is infinite for d <= 2");
  const JumpLaw p = transition_p(k);
  GreenValues out;
  out.sites = sorted_unique(xs);
  out.method = method;
  bool ok = method == GreenMethod::series ? series_green(p, out.sites, options, out)
                                          : fourier_green(p, out.sites, options, out);
  if (!ok) {
    out.fell_back = true;
    out.method = method == GreenMethod::series ? GreenMethod::fourier : GreenMethod::series;
    ok = out.method == GreenMethod::series ? series_green(p, out.sites, options, out)
                                           : fourier_green(p, out.sites, options, out);
    if (!ok) throw InvalidState("neither Green function method converged for this kernel");
  }
  return out;
}

double green_function(const MassField& k, const Site& x, GreenMethod method, const GreenOptions& options) {
  const std::vector<Site> xs{x};
  return green_values(k, xs, method, options).values.front();
}

double srw_green_origin(int d) {
  if (d <= 2) throw DivergentGreenFunction("simple random walk is recurrent for d <= 2");
  return green_function(srw_law(d), Site(d));
}

double srw_return_probability(int d) {
  if (d <= 2) return 1.0;
  return 1.0 - 1.0 / srw_green_origin(d);
}

std::string to_string(PhaseClass c) {
  switch (c) {
    case PhaseClass::slow_growth_certified: return "slow_growth_certified";
    case PhaseClass::localization_condition_holds: return "localization_condition_holds";
    case PhaseClass::regular_growth_sufficient: return "regular_growth_sufficient";
    case PhaseClass::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

WitnessSearch find_witness(const KernelDistribution& dist, int n_max, std::size_t cell_cap) {
  const int d = dist.dim();
  const JumpLaw p = transition_p(dist.mean());
  const auto entries = p.entries();
  const int pr = linf_radius(entries);
  const LatticeField b = beta_matrix(dist).difference_sums();
  const double target = 2.0 * p.rate();

  WitnessSearch res;
  DenseBox cur(d, 0);
  cur.at(Site(d)) = 1.0;
  double value = b(Site(d));
  for (int n = 0;; ++n) {
    res.searched = n;
    res.last_value = value;
    if (value > target) {
      res.n = n;
      return res;
    }
    if (n >= n_max) return res;
    if (DenseBox::cells_for(d, cur.radius() + pr) > cell_cap) {
      res.truncated = true;
      return res;
    }
    cur = cur.convolve(entries);
    for (const auto& [u, bu] : b) value += bu * cur(u);
  }
}

std::vector<Site> beta_differences(const BetaTable& beta) {
  std::set<Site> s;
  for (const auto& [key, v] : beta.entries()) s.insert(key.first - key.second);
  return {s.begin(), s.end()};
}

double green_beta_contraction(const BetaTable& beta, const GreenValues& g) {
  double s = 0.0;
  for (const auto& [key, v] : beta.entries()) s += g.at(key.first - key.second) * v;
  return s;
}

namespace {

GreenMethod usable_method(const KernelDistribution& dist, GreenMethod requested) {
  if (requested == GreenMethod::series) return requested;
  const JumpLaw p = transition_p(dist.mean());
  std::vector<Site> support;
  for (const auto& [y, w] : p.probs) support.push_back(y);
  return generates_lattice(p.d, support) ? GreenMethod::fourier : GreenMethod::series;
}

}  // namespace

PhaseReport localization_statistic(const KernelDistribution& dist, const PhaseOptions& options) {
  PhaseReport rep;
  rep.d = dist.dim();
  rep.k_norm = dist.k_norm();
  rep.k0 = dist.k0();
  rep.log_moment_margin = log_moment_margin(dist);
  const BetaTable beta = beta_matrix(dist);

  if (rep.d >= 3) {
    std::vector<Site> xs = beta_differences(beta);
    xs.push_back(Site(rep.d));
    const GreenValues g = green_values(dist.mean(), xs, usable_method(dist, options.method), options.green);
    rep.loc_statistic = green_beta_contraction(beta, g);
    rep.g0 = g.at(Site(rep.d));
    rep.pi_d = 1.0 - 1.0 / ((rep.k_norm - rep.k0) * *rep.g0);
  } else {
    rep.pi_d = 1.0;
  }

  if (options.search_witness) {
    rep.witness = find_witness(dist, options.n_max, options.green.cell_cap);
    rep.witness_n = rep.witness.n;
  }

  if (rep.d <= 2 || rep.log_moment_margin > 0.0)
    rep.classification = PhaseClass::slow_growth_certified;
  else if (std::abs(*rep.loc_statistic - 2.0) < options.margin)
    rep.classification = PhaseClass::inconclusive;
  else if (*rep.loc_statistic > 2.0)
    rep.classification = PhaseClass::localization_condition_holds;
  else
    rep.classification = PhaseClass::regular_growth_sufficient;
  return rep;
}

PotlatchStatistic potlatch_statistic(const KernelDistribution& dist, const GreenOptions& options) {
  if (!dist.potlatch()) throw InvalidParameter("potlatch threshold needs a potlatch kernel");
  const int d = dist.dim();
  if (d <= 2) throw DivergentGreenFunction("the Green function is infinite for d <= 2");
  const PotlatchLaw& law = *dist.potlatch();
  const BetaTable beta = beta_matrix(dist);

  std::vector<Site> xs = beta_differences(beta);
  xs.push_back(Site(d));
  for (const auto& [x, a] : law.k)
    for (const auto& [y, b] : law.k) xs.push_back(x - y);
  const GreenValues g = green_values(dist.mean(), xs, usable_method(dist, GreenMethod::fourier), options);

  double gkk = 0.0;
  for (const auto& [x, a] : law.k)
    for (const auto& [y, b] : law.k) gkk += g.at(x - y) * a * b;
  const double k_norm = law.k.sum();
  const double g0 = g.at(Site(d));

  PotlatchStatistic s;
  s.direct = green_beta_contraction(beta, g);
  s.identity = law.w_second_moment * gkk + 2.0 - (2.0 * k_norm - 1.0) * g0;
  s.threshold = (2.0 * k_norm - 1.0) * g0 / gkk;
  s.w_second_moment = law.w_second_moment;
  return s;
}

double potlatch_threshold(const KernelDistribution& dist, const GreenOptions& options) {
  return potlatch_statistic(dist, options).threshold;
}

double q_matrix(const KernelDistribution& dist, const Site& x, const Site& y) {
  const MassField& k = dist.mean();
  double q = k(x - y) + k(y - x);
  if (x == y) q -= 2.0 * dist.k_norm();
  if (x.is_origin()) {
    const BetaTable beta = beta_matrix(dist);
    for (const auto& [key, v] : beta.entries())
      if (key.second - key.first == y) q += v;
  }
  return q;
}

double symmetric_generator(const MassField& k, const LatticeField& f, const Site& x) {
  double s = 0.0;
  const double fx = f(x);
  for (const auto& [y, w] : symmetrized(k)) s += w * (f(x - y) - fx);
  return s;
}

HarmonicReport harmonic_h(const KernelDistribution& dist, const PhaseOptions& options) {
  const int d = dist.dim();
  if (d <= 2) throw DivergentGreenFunction("h = 1 + cG needs a finite Green function (d >= 3)");
  const BetaTable beta = beta_matrix(dist);
  const MassField s = symmetrized(dist.mean());

  const std::vector<Site> window = l1_ball(d, options.window_radius);
  std::vector<Site> xs = l1_ball(d, options.eval_radius);
  for (const Site& x : beta_differences(beta)) xs.push_back(x);
  for (const Site& x : window)
    for (const auto& [y, w] : s) xs.push_back(x - y);
  const GreenValues g = green_values(dist.mean(), xs, usable_method(dist, options.method), options.green);

  HarmonicReport rep;
  rep.statistic = green_beta_contraction(beta, g);
  if (!(rep.statistic < 2.0))
    throw ConditionNotSatisfied("h = 1 + cG needs sum G(x-y) beta_{x,y} < 2 (got " +
                                std::to_string(rep.statistic) + ")");
  rep.c = beta.total() / (2.0 - rep.statistic);

  LatticeField h(d);
  for (std::size_t i = 0; i < g.sites.size(); ++i) h.set(g.sites[i], 1.0 + rep.c * g.values[i]);
  double beta_term = 0.0;
  for (const auto& [key, v] : beta.entries()) beta_term += h(key.first - key.second) * v;

  for (const Site& x : window) {
    double r = symmetric_generator(dist.mean(), h, x);
    if (x.is_origin()) {
      r += 0.5 * beta_term;
      rep.origin_residual = r;
    }
    if (std::abs(r) >= rep.max_residual) {
      rep.max_residual = std::abs(r);
      rep.worst_site = x;
    }
  }
  rep.interior_points = window.size();
  MassField out(d);
  for (const Site& x : l1_ball(d, options.eval_radius)) out.set(x, h(x));
  rep.h = std::move(out);
  return rep;
}

}  // namespace linsys
