#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "linsys/engine.hpp"
#include "linsys/kernel.hpp"
#include "linsys/lattice_field.hpp"

namespace linsys {

/// S = <g*rho, rho>.
double overlap_functional_S(const MassField& rho, const LatticeField& g);

/// Exact drift of S under one unit of time, with the terms of its lower bound.
/// Sums run over active sites z and atoms xi of the kernel law. With
/// J_x = rho_x + (xi - delta_0)_{x-z} rho_z and m = 1 + (|xi| - 1) rho_z:
///   U = sum g(x-y) (J_x J_y - rho_x rho_y),  V = (|xi| - 1) rho_z U,
///   W = (|xi| - 1) rho_z S,  drift summand = (S + U) / m^2 - S.
struct DriftBreakdown {
  /// Excludes (z, xi) pairs with m = 0, whose mass is in extinction_mass.
  double drift = 0.0;
  double u_term = 0.0;
  double v_term = 0.0;
  double w_term = 0.0;
  /// u_term - 2 w_term.
  double lower_bound_lhs = 0.0;
  /// (sum g beta - 2 (|k| - k_0)) R.
  double lower_bound_rhs = 0.0;
  /// drift - sum over the same pairs of (U - 2V - 2W); nonnegative.
  double pointwise_margin = 0.0;
  double extinction_mass = 0.0;
  double overlap = 0.0;
  double s_value = 0.0;
};

DriftBreakdown exact_drift(const MassField& rho, const KernelDistribution& dist, const LatticeField& g);

/// Right-hand sides of the closed forms for the U and W terms:
/// <g*(k-d0)*rho, rho> + <g*(k^-d0)*rho, rho> + (sum g beta) R, and (|k| - 1) S.
struct DriftClosedForms {
  double u_closed = 0.0;
  double w_closed = 0.0;
};
DriftClosedForms drift_closed_forms(const MassField& rho, const KernelDistribution& dist, const LatticeField& g);
/// As above with an explicit beta table in the last term.
DriftClosedForms drift_closed_forms(const MassField& rho, const KernelDistribution& dist, const LatticeField& g,
                                    const BetaTable& beta);

/// c with v_term <= c R^{3/2}: sum_xi P(xi) ||xi| - 1| (2|g| |a|_1 + max g |a|_1^2), a = xi - delta_0.
double v_term_constant(const KernelDistribution& dist, const LatticeField& g);

/// c with |F_z(xi)| <= c rho_z whenever rho_z <= 1/2.
double f_bound_constant(const KernelDistribution& dist, const LatticeField& g);

struct DriftWitness {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// c1 = sum g beta - 2 (|k| - k_0) and c2 = 2 v_term_constant.
DriftWitness drift_positivity_witness(const KernelDistribution& dist, const LatticeField& g);

struct AuditOptions {
  /// Configurations above this many active sites are counted as large.
  std::size_t large_config_sites = 1000;
};

struct DriftAudit {
  DriftWitness witness;
  std::size_t configs = 0;
  std::size_t violations = 0;
  std::size_t large_configs = 0;
  /// min over configs of drift - (c1 R - c2 R^{3/2}).
  double min_slack = 0.0;
  /// max |F_z(xi)| / (2|g|) over all configs and pairs.
  double max_f_ratio_global = 0.0;
  /// max |F_z(xi)| / (c_F rho_z) over pairs with rho_z <= 1/2.
  double max_f_ratio_local = 0.0;
  std::vector<DriftBreakdown> records;
};

DriftAudit audit_drift(const KernelDistribution& dist, const LatticeField& g,
                       std::span<const MassField> configs, const AuditOptions& options = {});

/// F_z(xi) = sum g(x-y) (Jbar_x Jbar_y - rho_x rho_y) for every active z and
/// atom with m > 0, in (site-major, atom-minor) order.
struct FTerm {
  Site z;
  std::size_t atom = 0;
  double rho_z = 0.0;
  double value = 0.0;
};
std::vector<FTerm> f_terms(const MassField& rho, const KernelDistribution& dist, const LatticeField& g);

struct HausdorffYoung {
  double lhs = 0.0;  ///< |f*h|_2
  double rhs = 0.0;  ///< |f|_1 |h|_2
  bool holds() const { return lhs <= rhs * (1.0 + 1e-12) + 1e-300; }
};
HausdorffYoung hausdorff_young_check(const LatticeField& f, const LatticeField& h);

}  // namespace linsys
