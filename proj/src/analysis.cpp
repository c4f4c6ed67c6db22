#include "linsys/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linsys/errors.hpp"

namespace linsys {

namespace {

struct AtomTerms {
  double prob = 0.0;
  double excess = 0.0;  ///< |xi| - 1
  std::vector<std::pair<Site, double>> centered;
  double self_quadratic = 0.0;  ///< sum g(u - v) a_u a_v
  double l1 = 0.0;
};

std::vector<AtomTerms> atom_terms(const KernelDistribution& dist, const LatticeField& g) {
  std::vector<AtomTerms> out;
  const int d = dist.dim();
  for (const auto& atom : dist.atoms()) {
    AtomTerms t;
    t.prob = atom.prob;
    t.excess = atom.total - 1.0;
    const LatticeField a = atom.vector - delta0(d);
    for (const auto& [o, v] : a) {
      t.centered.emplace_back(o, v);
      t.l1 += std::abs(v);
    }
    for (const auto& [u, au] : a)
      for (const auto& [v, av] : a) t.self_quadratic += g(u - v) * au * av;
    out.push_back(std::move(t));
  }
  return out;
}

/// Shared pieces of every drift evaluation for one configuration.
struct DriftContext {
  LatticeField g_rho;
  LatticeField gc_rho;
  double s = 0.0;
  double overlap = 0.0;

  DriftContext(const MassField& rho, const LatticeField& g)
      : g_rho(convolve(g, rho)), gc_rho(convolve(g.reflected(), rho)) {
    s = inner(g_rho, rho);
    overlap = rho.l2_norm_squared();
  }

  /// sum g(x-y) (J_x J_y - rho_x rho_y) for the atom at z.
  double u_value(const Site& z, double rho_z, const AtomTerms& t) const {
    double lin = 0.0;
    for (const auto& [o, a] : t.centered) {
      const Site x = z + o;
      lin += a * (g_rho(x) + gc_rho(x));
    }
    return rho_z * lin + rho_z * rho_z * t.self_quadratic;
  }
};

double max_abs_entry(const LatticeField& g) { return g.max_abs(); }

}  // namespace

double overlap_functional_S(const MassField& rho, const LatticeField& g) { return convolution_inner(g, rho, rho); }

DriftBreakdown exact_drift(const MassField& rho, const KernelDistribution& dist, const LatticeField& g) {
  if (rho.dim() != dist.dim() || g.dim() != dist.dim()) throw InvalidParameter("dimension mismatch");
  const auto terms = atom_terms(dist, g);
  const DriftContext ctx(rho, g);
  const BetaTable beta = beta_matrix(dist);

  DriftBreakdown out;
  out.overlap = ctx.overlap;
  out.s_value = ctx.s;
  for (const auto& [z, rz] : rho) {
    for (const AtomTerms& t : terms) {
      const double u = ctx.u_value(z, rz, t);
      const double v = t.excess * rz * u;
      const double w = t.excess * rz * ctx.s;
      out.u_term += t.prob * u;
      out.v_term += t.prob * v;
      out.w_term += t.prob * w;
      const double m = 1.0 + t.excess * rz;
      if (m <= 0.0) {
        out.extinction_mass += t.prob;
        continue;
      }
      const double f = (ctx.s + u) / (m * m) - ctx.s;
      out.drift += t.prob * f;
      out.pointwise_margin += t.prob * (f - (u - 2.0 * v - 2.0 * w));
    }
  }
  out.lower_bound_lhs = out.u_term - 2.0 * out.w_term;
  out.lower_bound_rhs = (beta.contract(g) - 2.0 * (dist.k_norm() - dist.k0())) * ctx.overlap;
  return out;
}

DriftClosedForms drift_closed_forms(const MassField& rho, const KernelDistribution& dist, const LatticeField& g) {
  return drift_closed_forms(rho, dist, g, beta_matrix(dist));
}

DriftClosedForms drift_closed_forms(const MassField& rho, const KernelDistribution& dist, const LatticeField& g,
                                    const BetaTable& beta) {
  const int d = dist.dim();
  const LatticeField k_minus = dist.mean() - delta0(d);
  const LatticeField kc_minus = dist.mean().reflected() - delta0(d);
  const double r = rho.l2_norm_squared();
  DriftClosedForms c;
  c.u_closed = inner(convolve(convolve(g, k_minus), rho), rho) + inner(convolve(convolve(g, kc_minus), rho), rho) +
               beta.contract(g) * r;
  c.w_closed = (dist.k_norm() - 1.0) * inner(convolve(g, rho), rho);
  return c;
}

double v_term_constant(const KernelDistribution& dist, const LatticeField& g) {
  const double g_l1 = g.l1_norm();
  const double g_max = max_abs_entry(g);
  double c = 0.0;
  for (const AtomTerms& t : atom_terms(dist, g))
    c += t.prob * std::abs(t.excess) * (2.0 * g_l1 * t.l1 + g_max * t.l1 * t.l1);
  return c;
}

double f_bound_constant(const KernelDistribution& dist, const LatticeField& g) {
  const double g_max = max_abs_entry(g);
  double c = 0.0;
  for (const AtomTerms& t : atom_terms(dist, g)) {
    const double b = std::abs(t.excess);
    c = std::max(c, 4.0 * (2.0 * g_max * t.l1 + g_max * t.l1 * t.l1 + (2.0 + b) * b * g_max));
  }
  return c;
}

DriftWitness drift_positivity_witness(const KernelDistribution& dist, const LatticeField& g) {
  DriftWitness w;
  w.c1 = beta_matrix(dist).contract(g) - 2.0 * (dist.k_norm() - dist.k0());
  if (!(w.c1 > 0.0)) throw InvalidParameter("g is not a witness: sum g beta - 2(|k| - k_0) <= 0");
  w.c2 = 2.0 * v_term_constant(dist, g);
  return w;
}

std::vector<FTerm> f_terms(const MassField& rho, const KernelDistribution& dist, const LatticeField& g) {
  const auto terms = atom_terms(dist, g);
  const DriftContext ctx(rho, g);
  std::vector<FTerm> out;
  for (const auto& [z, rz] : rho) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double m = 1.0 + terms[i].excess * rz;
      if (m <= 0.0) continue;
      const double u = ctx.u_value(z, rz, terms[i]);
      out.push_back(FTerm{z, i, rz, (ctx.s + u) / (m * m) - ctx.s});
    }
  }
  return out;
}

DriftAudit audit_drift(const KernelDistribution& dist, const LatticeField& g, std::span<const MassField> configs,
                       const AuditOptions& options) {
  DriftAudit audit;
  audit.witness = drift_positivity_witness(dist, g);
  const double g_l1 = g.l1_norm();
  const double c_f = f_bound_constant(dist, g);
  audit.min_slack = std::numeric_limits<double>::infinity();
  for (const MassField& rho : configs) {
    const DriftBreakdown b = exact_drift(rho, dist, g);
    const double bound = audit.witness.c1 * b.overlap - audit.witness.c2 * std::pow(b.overlap, 1.5);
    const double slack = b.drift - bound;
    audit.min_slack = std::min(audit.min_slack, slack);
    if (slack < -1e-12 * std::max(1.0, std::abs(bound))) ++audit.violations;
    if (rho.size() > options.large_config_sites) ++audit.large_configs;
    for (const FTerm& f : f_terms(rho, dist, g)) {
      audit.max_f_ratio_global = std::max(audit.max_f_ratio_global, std::abs(f.value) / (2.0 * g_l1));
      if (f.rho_z <= 0.5 && c_f > 0.0)
        audit.max_f_ratio_local = std::max(audit.max_f_ratio_local, std::abs(f.value) / (c_f * f.rho_z));
    }
    audit.records.push_back(b);
    ++audit.configs;
  }
  if (audit.configs == 0) audit.min_slack = 0.0;
  return audit;
}

HausdorffYoung hausdorff_young_check(const LatticeField& f, const LatticeField& h) {
  HausdorffYoung r;
  r.lhs = std::sqrt(convolve(f, h).l2_norm_squared());
  r.rhs = f.l1_norm() * std::sqrt(h.l2_norm_squared());
  return r;
}

}  // namespace linsys
