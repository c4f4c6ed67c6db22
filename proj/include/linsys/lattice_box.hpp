#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "linsys/lattice_field.hpp"

namespace linsys {

/// Dense values on the cube [-radius, radius]^d, axis 0 fastest. Used for
/// convolution powers whose support fills a growing box.
class DenseBox {
 public:
  DenseBox(int d, int radius);
  static DenseBox from_field(const LatticeField& f);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  std::size_t cells() const { return data_.size(); }
  static std::size_t cells_for(int d, int radius);

  bool contains(const Site& x) const { return x.linf_norm() <= radius_; }
  /// Value at x; zero outside the box.
  double operator()(const Site& x) const;
  double& at(const Site& x) { return data_[offset(x)]; }

  /// (this * p) on the box grown by the l-infinity radius of p, or on the
  /// box of radius max_radius if that is smaller (mass outside is dropped).
  DenseBox convolve(std::span<const std::pair<Site, double>> p,
                    int max_radius = std::numeric_limits<int>::max()) const;

  LatticeField to_field() const;

 private:
  std::size_t offset(const Site& x) const;

  int dim_;
  int radius_;
  std::vector<double> data_;
};

}  // namespace linsys
