#include "linsys/kernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "linsys/errors.hpp"

namespace linsys {

namespace {

constexpr double kProbTolerance = 1e-12;
constexpr double kRankTolerance = 1e-12;

double atom_total(const MassField& v) { return v.sum(); }

MassField mean_of(int d, const std::vector<KernelAtom>& atoms) {
  MassField k(d);
  for (const auto& a : atoms)
    for (const auto& [x, v] : a.vector) k.add(x, a.prob * v);
  return k;
}

void normalize_probabilities(std::vector<KernelAtom>& atoms) {
  if (atoms.empty()) throw InvalidParameter("kernel law needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.prob > 0.0) || !std::isfinite(a.prob))
      throw InvalidParameter("atom probabilities must be positive and finite");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > kProbTolerance)
    throw InvalidParameter("atom probabilities sum to " + std::to_string(total) + ", not 1");
  for (auto& a : atoms) a.prob /= total;
}

void throw_on_failure(const AssumptionReport& r) {
  if (!r.bounded)
    throw AssumptionViolation("bounded_finite_range",
                              "kernel entries must be finite and nonnegative");
  if (!r.truly_d_dimensional)
    throw AssumptionViolation("truly_d_dimensional",
                              "support of the mean kernel does not contain a linear basis of R^d (rank " +
                                  std::to_string(r.mean_support_rank) + ")");
  if (!r.mass_not_conserved)
    throw AssumptionViolation("mass_not_conserved", "P(|K| = 1) must be < 1");
}

}  // namespace

std::vector<std::string> AssumptionReport::failures() const {
  std::vector<std::string> out;
  if (!bounded) out.emplace_back("bounded_finite_range");
  if (!truly_d_dimensional) out.emplace_back("truly_d_dimensional");
  if (!mass_not_conserved) out.emplace_back("mass_not_conserved");
  return out;
}

KernelDistribution::KernelDistribution(int d, std::vector<KernelAtom> atoms, KernelFamily family)
    : dim_(d), atoms_(std::move(atoms)), family_(family), mean_(d) {
  for (auto& a : atoms_) {
    a.total = atom_total(a.vector);
    AtomOffsets view;
    view.total = a.total;
    for (const auto& [x, v] : a.vector) {
      if (x.is_origin())
        view.self = v;
      else
        view.others.emplace_back(x, v);
    }
    offsets_.push_back(std::move(view));
  }
  cdf_.resize(atoms_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    acc += atoms_[i].prob;
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;
  mean_ = mean_of(d, atoms_);
  k_norm_ = mean_.sum();
  report_ = validate(d, atoms_);
}

std::size_t KernelDistribution::atom_for_uniform(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return atoms_.size() - 1;
  return static_cast<std::size_t>(it - cdf_.begin());
}

KernelDistribution make_bcpp(int d, double lambda) {
  if (d < 1 || d > kMaxDim) throw InvalidParameter("dimension out of range");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be positive");
  const double denom = 2.0 * d * lambda + 1.0;
  std::vector<KernelAtom> atoms;
  for (int axis = 0; axis < d; ++axis) {
    for (int sign : {1, -1}) {
      KernelAtom a{lambda / denom, MassField(d), 0.0};
      a.vector.set(Site(d), 1.0);
      a.vector.set(Site::unit(d, axis, sign), 1.0);
      atoms.push_back(std::move(a));
    }
  }
  atoms.push_back(KernelAtom{1.0 / denom, MassField(d), 0.0});
  KernelDistribution dist(d, std::move(atoms), KernelFamily::bcpp);
  dist.lambda_ = lambda;
  throw_on_failure(dist.report_);
  return dist;
}

KernelDistribution make_potlatch(const MassField& k, std::span<const WeightAtom> w) {
  const int d = k.dim();
  if (k.empty()) throw InvalidParameter("potlatch table k must be nonzero");
  for (const auto& [x, v] : k)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("potlatch table k must be nonnegative");
  if (w.empty()) throw InvalidParameter("W needs at least one atom");
  double total = 0.0;
  for (const auto& a : w) {
    if (!(a.prob > 0.0)) throw InvalidParameter("W atom probabilities must be positive");
    if (!(a.value >= 0.0) || !std::isfinite(a.value))
      throw InvalidParameter("W atoms must be nonnegative and bounded");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > kProbTolerance)
    throw InvalidParameter("W atom probabilities must sum to 1");
  double mean = 0.0;
  double second = 0.0;
  for (const auto& a : w) {
    mean += a.prob / total * a.value;
    second += a.prob / total * a.value * a.value;
  }
  if (std::abs(mean - 1.0) > kProbTolerance)
    throw InvalidParameter("W must have mean one (E[W] = " + std::to_string(mean) + ")");
  const bool all_one =
      std::all_of(w.begin(), w.end(), [](const WeightAtom& a) { return std::abs(a.value - 1.0) <= kProbTolerance; });
  if (all_one) throw InvalidParameter("W must satisfy P(W = 1) < 1");

  std::vector<KernelAtom> atoms;
  PotlatchLaw law{k, {}, second};
  for (const auto& a : w) {
    atoms.push_back(KernelAtom{a.prob / total, k.scaled(a.value), 0.0});
    law.w.push_back(WeightAtom{a.prob / total, a.value});
  }
  KernelDistribution dist(d, std::move(atoms), KernelFamily::potlatch);
  dist.potlatch_ = std::move(law);
  throw_on_failure(dist.report_);
  return dist;
}

KernelDistribution make_custom(int d, std::vector<KernelAtom> atoms, AssumptionPolicy policy) {
  if (d < 1 || d > kMaxDim) throw InvalidParameter("dimension out of range");
  for (const auto& a : atoms)
    if (a.vector.dim() != d) throw InvalidParameter("atom dimension does not match kernel dimension");
  normalize_probabilities(atoms);
  KernelDistribution dist(d, std::move(atoms), KernelFamily::custom);
  if (policy == AssumptionPolicy::reject) throw_on_failure(dist.report_);
  return dist;
}

std::size_t sample_atom(const KernelDistribution& dist, RandomStream& rng) {
  return dist.atom_for_uniform(rng.uniform());
}

const MassField& sample(const KernelDistribution& dist, RandomStream& rng) {
  return dist.atoms()[sample_atom(dist, rng)].vector;
}

MassField mean_kernel(const KernelDistribution& dist) { return dist.mean(); }

double BetaTable::operator()(const Site& x, const Site& y) const {
  auto it = entries_.find({x, y});
  return it == entries_.end() ? 0.0 : it->second;
}

void BetaTable::add(const Site& x, const Site& y, double value) {
  if (value == 0.0) return;
  entries_[{x, y}] += value;
}

double BetaTable::total() const {
  double s = 0.0;
  for (const auto& [key, v] : entries_) s += v;
  return s;
}

bool BetaTable::is_symmetric(double tol) const {
  for (const auto& [key, v] : entries_) {
    if (std::abs(v - (*this)(key.second, key.first)) > tol) return false;
  }
  return true;
}

LatticeField BetaTable::difference_sums() const {
  LatticeField b(dim_);
  for (const auto& [key, v] : entries_) b.add(key.first - key.second, v);
  return b;
}

double BetaTable::contract(const LatticeField& f) const {
  double s = 0.0;
  for (const auto& [key, v] : entries_) s += f(key.first - key.second) * v;
  return s;
}

BetaTable beta_matrix(const KernelDistribution& dist) {
  const int d = dist.dim();
  BetaTable beta(d);
  for (const auto& atom : dist.atoms()) {
    LatticeField centered = atom.vector - delta0(d);
    for (const auto& [x, a] : centered)
      for (const auto& [y, b] : centered) beta.add(x, y, atom.prob * a * b);
  }
  return beta;
}

double log_moment_margin(const KernelDistribution& dist) {
  double entropy_term = 0.0;
  for (const auto& atom : dist.atoms()) {
    double s = 0.0;
    for (const auto& [x, v] : atom.vector)
      if (v > 0.0) s += v * std::log(v);
    entropy_term += atom.prob * s;
  }
  return entropy_term - (dist.k_norm() - 1.0);
}

AssumptionReport validate(int d, std::span<const KernelAtom> atoms) {
  AssumptionReport r;
  MassField k(d);
  for (const auto& a : atoms) {
    for (const auto& [x, v] : a.vector) {
      if (!(v >= 0.0) || !std::isfinite(v)) r.bounded = false;
      r.b_K = std::max(r.b_K, v);
      r.r_K = std::max(r.r_K, x.l1_norm());
      k.add(x, a.prob * v);
    }
    if (std::abs(a.vector.sum() - 1.0) <= kProbTolerance) r.prob_unit_total += a.prob;
  }

  std::vector<Site> support;
  for (const auto& [x, v] : k)
    if (v != 0.0 && !x.is_origin()) support.push_back(x);
  if (!support.empty()) {
    Eigen::MatrixXd m(d, static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j)
      for (int i = 0; i < d; ++i) m(i, static_cast<Eigen::Index>(j)) = support[j][i];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(kRankTolerance);
    r.mean_support_rank = static_cast<int>(lu.rank());
  }
  r.truly_d_dimensional = r.mean_support_rank == d;
  r.mass_not_conserved = r.prob_unit_total < 1.0 - kProbTolerance;
  return r;
}

AssumptionReport validate(const KernelDistribution& dist) { return dist.assumptions(); }

}  // namespace linsys
