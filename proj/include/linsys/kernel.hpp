#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "linsys/lattice_field.hpp"
#include "linsys/rng.hpp"

namespace linsys {

/// One realization of the random update vector K with its probability.
struct KernelAtom {
  double prob = 0.0;
  MassField vector;
  /// |xi| = sum_x xi_x, cached at construction.
  double total = 0.0;
};

/// One atom of the scalar multiplier W of a potlatch kernel K = W k.
struct WeightAtom {
  double prob = 0.0;
  double value = 0.0;
};

/// Flat view of an atom for the hot simulation loop: the origin entry and
/// the off-origin (offset, value) pairs.
struct AtomOffsets {
  double self = 0.0;
  double total = 0.0;
  std::vector<std::pair<Site, double>> others;
};

enum class KernelFamily { bcpp, potlatch, custom };

struct PotlatchLaw {
  MassField k;
  std::vector<WeightAtom> w;
  double w_second_moment = 0.0;
};

/// Outcome of checking the standing model assumptions on a kernel law.
struct AssumptionReport {
  bool bounded = true;             ///< finite nonnegative entries, finite range
  bool truly_d_dimensional = true; ///< {x : k_x != 0} contains a basis of R^d
  bool mass_not_conserved = true;  ///< P(|K| = 1) < 1
  int mean_support_rank = 0;
  double b_K = 0.0;
  int r_K = 0;
  double prob_unit_total = 0.0;    ///< P(|K| = 1)

  bool ok() const { return bounded && truly_d_dimensional && mass_not_conserved; }
  /// Names of the failed assumptions, in a fixed order.
  std::vector<std::string> failures() const;
};

/// What a constructor does when an assumption fails.
enum class AssumptionPolicy { reject, warn };

/// Finite-atom law of the random vector K. Immutable after construction.
class KernelDistribution {
 public:
  int dim() const { return dim_; }
  const std::vector<KernelAtom>& atoms() const { return atoms_; }
  const std::vector<AtomOffsets>& atom_offsets() const { return offsets_; }
  std::size_t atom_count() const { return atoms_.size(); }
  double b_K() const { return report_.b_K; }
  int r_K() const { return report_.r_K; }
  KernelFamily family() const { return family_; }
  std::optional<double> bcpp_lambda() const { return lambda_; }
  const std::optional<PotlatchLaw>& potlatch() const { return potlatch_; }
  const AssumptionReport& assumptions() const { return report_; }

  /// Mean kernel k_x = E[K_x].
  const MassField& mean() const { return mean_; }
  /// |k|.
  double k_norm() const { return k_norm_; }
  /// k_0 = E[K_0].
  double k0() const { return mean_(Site(dim_)); }

  /// Atom selected by a uniform variate u in [0, 1).
  std::size_t atom_for_uniform(double u) const;

  friend KernelDistribution make_bcpp(int d, double lambda);
  friend KernelDistribution make_potlatch(const MassField& k, std::span<const WeightAtom> w);
  friend KernelDistribution make_custom(int d, std::vector<KernelAtom> atoms, AssumptionPolicy policy);

 private:
  KernelDistribution(int d, std::vector<KernelAtom> atoms, KernelFamily family);

  int dim_;
  std::vector<KernelAtom> atoms_;
  std::vector<AtomOffsets> offsets_;
  std::vector<double> cdf_;
  KernelFamily family_;
  std::optional<double> lambda_;
  std::optional<PotlatchLaw> potlatch_;
  MassField mean_;
  double k_norm_ = 0.0;
  AssumptionReport report_;
};

/// Binary contact path process: for each of the 2d neighbours e, the atom
/// delta_0 + delta_e with probability lambda/(2d lambda + 1); the zero vector
/// with probability 1/(2d lambda + 1).
KernelDistribution make_bcpp(int d, double lambda);

/// Potlatch kernel K = W k for a finite-atom, mean-one W with P(W = 1) < 1.
KernelDistribution make_potlatch(const MassField& k, std::span<const WeightAtom> w);

/// Arbitrary finite-atom law. Probabilities must be positive and sum to one
/// within 1e-12; they are then renormalized exactly.
KernelDistribution make_custom(int d, std::vector<KernelAtom> atoms,
                               AssumptionPolicy policy = AssumptionPolicy::reject);

/// Draws one realization of K.
const MassField& sample(const KernelDistribution& dist, RandomStream& rng);
std::size_t sample_atom(const KernelDistribution& dist, RandomStream& rng);

MassField mean_kernel(const KernelDistribution& dist);

/// Symmetric table beta_{x,y} = E[(K - delta_0)_x (K - delta_0)_y].
class BetaTable {
 public:
  using Key = std::pair<Site, Site>;

  explicit BetaTable(int d) : dim_(d) {}

  int dim() const { return dim_; }
  double operator()(const Site& x, const Site& y) const;
  void add(const Site& x, const Site& y, double value);
  const std::map<Key, double>& entries() const { return entries_; }

  /// sum_{x,y} beta_{x,y}; equals E[(|K| - 1)^2].
  double total() const;
  bool is_symmetric(double tol = 0.0) const;
  /// B(u) = sum_{x - y = u} beta_{x,y}.
  LatticeField difference_sums() const;
  /// sum_{x,y} f(x - y) beta_{x,y}.
  double contract(const LatticeField& f) const;

 private:
  int dim_;
  std::map<Key, double> entries_;
};

BetaTable beta_matrix(const KernelDistribution& dist);

/// sum_x E[K_x ln K_x] - (|k| - 1), with 0 ln 0 = 0. Positive values
/// certify the slow growth phase.
double log_moment_margin(const KernelDistribution& dist);

/// Checks boundedness, the basis condition on the mean kernel's support
/// (rank by elimination with pivot tolerance 1e-12) and P(|K| = 1) < 1.
AssumptionReport validate(const KernelDistribution& dist);
AssumptionReport validate(int d, std::span<const KernelAtom> atoms);

}  // namespace linsys
