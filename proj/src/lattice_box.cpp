#include "linsys/lattice_box.hpp"

#include <algorithm>

#include "linsys/errors.hpp"

namespace linsys {

DenseBox::DenseBox(int d, int radius) : dim_(d), radius_(radius), data_(cells_for(d, radius), 0.0) {
  if (radius < 0) throw InvalidParameter("box radius must be nonnegative");
}

std::size_t DenseBox::cells_for(int d, int radius) {
  std::size_t n = 1;
  for (int j = 0; j < d; ++j) n *= static_cast<std::size_t>(2 * radius + 1);
  return n;
}

DenseBox DenseBox::from_field(const LatticeField& f) {
  int r = 0;
  for (const auto& [x, v] : f) r = std::max(r, x.linf_norm());
  DenseBox box(f.dim(), r);
  for (const auto& [x, v] : f) box.at(x) = v;
  return box;
}

std::size_t DenseBox::offset(const Site& x) const {
  const std::size_t len = static_cast<std::size_t>(2 * radius_ + 1);
  std::size_t off = 0;
  std::size_t stride = 1;
  for (int j = 0; j < dim_; ++j) {
    off += static_cast<std::size_t>(x[j] + radius_) * stride;
    stride *= len;
  }
  return off;
}

double DenseBox::operator()(const Site& x) const { return contains(x) ? data_[offset(x)] : 0.0; }

DenseBox DenseBox::convolve(std::span<const std::pair<Site, double>> p, int max_radius) const {
  int pr = 0;
  for (const auto& [y, w] : p) pr = std::max(pr, y.linf_norm());
  DenseBox out(dim_, std::min(radius_ + pr, std::max(max_radius, 0)));
  const int len = 2 * radius_ + 1;
  const int out_len = 2 * out.radius_ + 1;
  const int shift = out.radius_ - radius_;

  // Rows along axis 0 are contiguous in both boxes, so each (row, offset)
  // pair is one shifted axpy, clipped to the output box.
  const std::size_t rows = data_.size() / static_cast<std::size_t>(len);
  std::vector<int> idx(static_cast<std::size_t>(dim_), 0);
  for (std::size_t row = 0; row < rows; ++row) {
    const double* src = data_.data() + row * static_cast<std::size_t>(len);
    int lo = 0;
    while (lo < len && src[lo] == 0.0) ++lo;
    int hi = len;
    while (hi > lo && src[hi - 1] == 0.0) --hi;
    if (lo < hi) {
      for (const auto& [y, w] : p) {
        std::size_t base = 0;
        std::size_t stride = static_cast<std::size_t>(out_len);
        bool inside = true;
        for (int j = 1; j < dim_; ++j) {
          const int o = idx[static_cast<std::size_t>(j)] + y[j] + shift;
          if (o < 0 || o >= out_len) {
            inside = false;
            break;
          }
          base += static_cast<std::size_t>(o) * stride;
          stride *= static_cast<std::size_t>(out_len);
        }
        if (!inside) continue;
        const int off = y[0] + shift;
        const int from = std::max(lo, -off);
        const int to = std::min(hi, out_len - off);
        double* dst = out.data_.data() + base;
        for (int i = from; i < to; ++i) dst[i + off] += w * src[i];
      }
    }
    for (int j = 1; j < dim_; ++j) {
      if (++idx[static_cast<std::size_t>(j)] < len) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
  return out;
}

LatticeField DenseBox::to_field() const {
  LatticeField f(dim_);
  const std::size_t len = static_cast<std::size_t>(2 * radius_ + 1);
  Site x(dim_);
  for (std::size_t flat = 0; flat < data_.size(); ++flat) {
    if (data_[flat] == 0.0) continue;
    std::size_t rem = flat;
    for (int j = 0; j < dim_; ++j) {
      x[j] = static_cast<int>(rem % len) - radius_;
      rem /= len;
    }
    f.set(x, data_[flat]);
  }
  return f;
}

}  // namespace linsys
