#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linsys/kernel.hpp"
#include "linsys/lattice_field.hpp"
#include "linsys/quadrature.hpp"

namespace linsys {

/// Symmetrized one-step law of the walk behind the Green function:
/// p(x) = (k_x + k_{-x}) / (2 (|k| - k_0)) for x != 0, p(0) = 0.
struct JumpLaw {
  int d = 1;
  MassField probs;
  double k_norm = 0.0;
  double k0 = 0.0;

  /// Total jump rate |k| - k_0 of the continuous-time walk.
  double rate() const { return k_norm - k0; }
  std::vector<std::pair<Site, double>> entries() const;
};

JumpLaw transition_p(const MassField& k);

/// phat(theta) = sum_x p(x) cos(x . theta).
double characteristic_function(const JumpLaw& p, std::span<const double> theta);

/// g_n = delta_0 + sum_{m=1}^n p_m.
MassField g_n(const JumpLaw& p, int n);

enum class GreenMethod { series, fourier };

struct GreenOptions {
  FourierOptions fourier;
  /// Cell budget for one dense convolution buffer in the series method.
  std::size_t cell_cap = std::size_t{1} << 23;
  /// Number of convolution powers the series method aims for.
  int series_order = 96;
  /// Further powers are added in steps of series_order/2 up to this order
  /// while the extrapolation spread is above series_tolerance.
  int max_series_order = 192;
  /// Boxes are clipped this many standard deviations of the walk beyond the window.
  double tail_sigmas = 8.0;
  /// Plain truncation: increment over the window below this for 5 consecutive n.
  double increment_tolerance = 1e-10;
  /// Extrapolated series are accepted when the spread between fits is below this.
  double series_tolerance = 1e-7;
};

struct GreenValues {
  std::vector<Site> sites;
  std::vector<double> values;
  /// Method that produced the values; differs from the request on fallback.
  GreenMethod method = GreenMethod::fourier;
  bool fell_back = false;
  double error_estimate = 0.0;
  /// Series: number of convolution powers used. Fourier: torus grid size.
  int order = 0;

  double at(const Site& x) const;
};

/// G(x) = (|k| - k_0)^{-1} sum_{n >= 0} p_n(x) at each requested site.
GreenValues green_values(const MassField& k, std::span<const Site> xs, GreenMethod method,
                         const GreenOptions& options = {});
double green_function(const MassField& k, const Site& x, GreenMethod method = GreenMethod::fourier,
                      const GreenOptions& options = {});

/// Green function of the discrete-time simple random walk at the origin.
double srw_green_origin(int d);
/// pi_d = 1 - 1/G_srw(0); 1 for d <= 2.
double srw_return_probability(int d);

enum class PhaseClass { slow_growth_certified, localization_condition_holds, regular_growth_sufficient, inconclusive };
std::string to_string(PhaseClass c);

struct PhaseOptions {
  double margin = 1e-3;
  int window_radius = 6;
  int eval_radius = 8;
  int n_max = 10000;
  bool search_witness = true;
  GreenMethod method = GreenMethod::fourier;
  GreenOptions green;
};

struct WitnessSearch {
  std::optional<int> n;
  /// Largest n examined.
  int searched = 0;
  /// The box budget stopped the search before n_max.
  bool truncated = false;
  /// sum_u B(u) g_n(u) at the last examined n.
  double last_value = 0.0;
};

/// Smallest n <= n_max with sum_{x,y} g_n(x - y) beta_{x,y} > 2 (|k| - k_0).
WitnessSearch find_witness(const KernelDistribution& dist, int n_max,
                           std::size_t cell_cap = std::size_t{1} << 22);

struct PhaseReport {
  int d = 1;
  double k_norm = 0.0;
  double k0 = 0.0;
  double log_moment_margin = 0.0;
  std::optional<double> loc_statistic;
  PhaseClass classification = PhaseClass::inconclusive;
  std::optional<int> witness_n;
  WitnessSearch witness;
  /// Return probability of the symmetrized walk (pi_d for BCPP).
  std::optional<double> pi_d;
  /// G(0).
  std::optional<double> g0;
};

/// Computes sum_{x,y} G(x - y) beta_{x,y} (d >= 3), the witness n and the
/// classification.
PhaseReport localization_statistic(const KernelDistribution& dist, const PhaseOptions& options = {});

/// sum_{x,y} G(x - y) beta_{x,y} with G taken from precomputed values.
double green_beta_contraction(const BetaTable& beta, const GreenValues& g);

/// Differences x - y over the support of beta.
std::vector<Site> beta_differences(const BetaTable& beta);

/// (2|k| - 1) G(0) / <G*k, k>. Requires a potlatch law and d >= 3.
double potlatch_threshold(const KernelDistribution& dist, const GreenOptions& options = {});

struct PotlatchStatistic {
  double direct = 0.0;    ///< sum G(x - y) beta_{x,y}
  double identity = 0.0;  ///< E[W^2] <G*k, k> + 2 - (2|k| - 1) G(0)
  double threshold = 0.0;
  double w_second_moment = 0.0;
};
PotlatchStatistic potlatch_statistic(const KernelDistribution& dist, const GreenOptions& options = {});

/// q(x, y) = k_{x-y} + k_{y-x} - 2|k| delta_{x,y} + delta_{0,x} sum_z beta_{z,z+y}.
double q_matrix(const KernelDistribution& dist, const Site& x, const Site& y);

struct HarmonicReport {
  double statistic = 0.0;
  /// h = 1 + c G with c = E[(|K| - 1)^2] / (2 - statistic).
  double c = 0.0;
  MassField h;
  double max_residual = 0.0;
  Site worst_site;
  double origin_residual = 0.0;
  std::size_t interior_points = 0;
};

/// h = 1 + cG on the l1 ball of radius eval_radius, with residuals of
/// (L_S h)(x) + 1/2 delta_{0,x} sum h(y - z) beta_{y,z} on radius window_radius.
HarmonicReport harmonic_h(const KernelDistribution& dist, const PhaseOptions& options = {});

/// (L_S f)(x) = sum_y s_y (f(x - y) - f(x)) with s = (k + k-check)/2.
double symmetric_generator(const MassField& k, const LatticeField& f, const Site& x);

}  // namespace linsys
