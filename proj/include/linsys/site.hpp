#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace linsys {

/// Largest lattice dimension a Site can hold.
inline constexpr int kMaxDim = 8;

/// A point of the integer lattice Z^d. Coordinates beyond dim() are zero.
class Site {
 public:
  Site() = default;
  explicit Site(int d);
  Site(std::initializer_list<int> coords);
  explicit Site(const std::vector<int>& coords);

  /// The unit vector sign * e_axis in Z^d.
  static Site unit(int d, int axis, int sign = 1);

  int dim() const { return dim_; }
  int operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  /// l1 norm |x| = sum_i |x_i|.
  int l1_norm() const;
  int linf_norm() const;
  bool is_origin() const;

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site operator-() const;

  std::vector<int> coords() const;
  std::string str() const;

  auto operator<=>(const Site&) const = default;
  bool operator==(const Site&) const = default;

 private:
  std::array<std::int32_t, kMaxDim> c_{};
  std::int32_t dim_ = 0;
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept;
};

/// All sites of Z^d with |x|_1 <= radius, in lexicographic order.
std::vector<Site> l1_ball(int d, int radius);

/// All sites of Z^d with |x|_inf <= radius, in lexicographic order.
std::vector<Site> linf_box(int d, int radius);

}  // namespace linsys
