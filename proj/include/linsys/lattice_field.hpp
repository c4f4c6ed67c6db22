#pragma once

#include <map>
#include <utility>

#include "linsys/site.hpp"

namespace linsys {

/// Finitely supported real function on Z^d. Exact zeros are never stored, and
/// iteration visits sites in lexicographic order so every reduction over a
/// field is reproducible.
class LatticeField {
 public:
  using Storage = std::map<Site, double>;
  using const_iterator = Storage::const_iterator;

  explicit LatticeField(int d = 1) : dim_(d) {}
  LatticeField(int d, std::initializer_list<std::pair<Site, double>> entries);

  int dim() const { return dim_; }

  double operator()(const Site& x) const;
  void set(const Site& x, double value);
  void add(const Site& x, double value);
  void erase(const Site& x) { entries_.erase(x); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }

  /// Plain sum of the entries (|f| for nonnegative fields).
  double sum() const;
  double l1_norm() const;
  double l2_norm_squared() const;
  double max_value() const;
  double max_abs() const;
  /// max |x|_1 over the support; 0 for an empty field.
  int radius() const;
  bool is_nonnegative() const;

  /// The reflection x -> f(-x).
  LatticeField reflected() const;
  LatticeField scaled(double factor) const;
  /// Shift by s: result(x) = f(x - s).
  LatticeField shifted(const Site& s) const;

  LatticeField& operator+=(const LatticeField& o);
  LatticeField& operator-=(const LatticeField& o);

  bool operator==(const LatticeField& o) const = default;

 private:
  int dim_;
  Storage entries_;
};

/// A nonnegative field: population, densities, kernels, Green-function
/// partial sums. Same storage as LatticeField; positivity is a usage contract
/// checked at module boundaries with is_nonnegative().
using MassField = LatticeField;

LatticeField operator+(LatticeField a, const LatticeField& b);
LatticeField operator-(LatticeField a, const LatticeField& b);

/// The unit mass at x.
LatticeField delta(const Site& x);
/// The unit mass at the origin of Z^d.
LatticeField delta0(int d);

/// Discrete convolution (f*h)(x) = sum_y f(y) h(x-y).
LatticeField convolve(const LatticeField& f, const LatticeField& h);

/// l2 inner product <f, h>.
double inner(const LatticeField& f, const LatticeField& h);

/// <f*g, h> = sum_{x,y} f(x - y) g(y) h(x) without materializing f*g.
double convolution_inner(const LatticeField& f, const LatticeField& g, const LatticeField& h);

}  // namespace linsys
