#include "linsys/lattice_field.hpp"

#include <algorithm>
#include <cmath>

#include "linsys/errors.hpp"

namespace linsys {

LatticeField::LatticeField(int d, std::initializer_list<std::pair<Site, double>> entries)
    : dim_(d) {
  for (const auto& [x, v] : entries) add(x, v);
}

double LatticeField::operator()(const Site& x) const {
  auto it = entries_.find(x);
  return it == entries_.end() ? 0.0 : it->second;
}

void LatticeField::set(const Site& x, double value) {
  if (x.dim() != dim_) throw InvalidParameter("site dimension does not match field dimension");
  if (value == 0.0)
    entries_.erase(x);
  else
    entries_[x] = value;
}

void LatticeField::add(const Site& x, double value) {
  if (value == 0.0) return;
  if (x.dim() != dim_) throw InvalidParameter("site dimension does not match field dimension");
  auto [it, inserted] = entries_.try_emplace(x, value);
  if (!inserted) {
    it->second += value;
    if (it->second == 0.0) entries_.erase(it);
  }
}

double LatticeField::sum() const {
  double s = 0.0;
  for (const auto& [x, v] : entries_) s += v;
  return s;
}

double LatticeField::l1_norm() const {
  double s = 0.0;
  for (const auto& [x, v] : entries_) s += std::abs(v);
  return s;
}

double LatticeField::l2_norm_squared() const {
  double s = 0.0;
  for (const auto& [x, v] : entries_) s += v * v;
  return s;
}

double LatticeField::max_value() const {
  double m = 0.0;
  bool first = true;
  for (const auto& [x, v] : entries_) {
    if (first || v > m) m = v;
    first = false;
  }
  return m;
}

double LatticeField::max_abs() const {
  double m = 0.0;
  for (const auto& [x, v] : entries_) m = std::max(m, std::abs(v));
  return m;
}

int LatticeField::radius() const {
  int r = 0;
  for (const auto& [x, v] : entries_) r = std::max(r, x.l1_norm());
  return r;
}

bool LatticeField::is_nonnegative() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const auto& e) { return e.second >= 0.0; });
}

LatticeField LatticeField::reflected() const {
  LatticeField r(dim_);
  for (const auto& [x, v] : entries_) r.entries_.emplace(-x, v);
  return r;
}

LatticeField LatticeField::scaled(double factor) const {
  LatticeField r(dim_);
  if (factor == 0.0) return r;
  for (const auto& [x, v] : entries_) r.set(x, v * factor);
  return r;
}

LatticeField LatticeField::shifted(const Site& s) const {
  LatticeField r(dim_);
  for (const auto& [x, v] : entries_) r.entries_.emplace(x + s, v);
  return r;
}

LatticeField& LatticeField::operator+=(const LatticeField& o) {
  for (const auto& [x, v] : o) add(x, v);
  return *this;
}

LatticeField& LatticeField::operator-=(const LatticeField& o) {
  for (const auto& [x, v] : o) add(x, -v);
  return *this;
}

LatticeField operator+(LatticeField a, const LatticeField& b) { return a += b; }
LatticeField operator-(LatticeField a, const LatticeField& b) { return a -= b; }

LatticeField delta(const Site& x) {
  LatticeField f(x.dim());
  f.set(x, 1.0);
  return f;
}

LatticeField delta0(int d) { return delta(Site(d)); }

LatticeField convolve(const LatticeField& f, const LatticeField& h) {
  if (f.dim() != h.dim()) throw InvalidParameter("convolution of fields of different dimension");
  LatticeField out(f.dim());
  for (const auto& [x, a] : f)
    for (const auto& [y, b] : h) out.add(x + y, a * b);
  return out;
}

double inner(const LatticeField& f, const LatticeField& h) {
  const LatticeField& small = f.size() <= h.size() ? f : h;
  const LatticeField& large = f.size() <= h.size() ? h : f;
  double s = 0.0;
  for (const auto& [x, v] : small) s += v * large(x);
  return s;
}

double convolution_inner(const LatticeField& f, const LatticeField& g, const LatticeField& h) {
  double s = 0.0;
  for (const auto& [x, hv] : h)
    for (const auto& [y, gv] : g) s += f(x - y) * gv * hv;
  return s;
}

}  // namespace linsys
