#include "linsys/site.hpp"

#include <cstdlib>
#include <stdexcept>

#include "linsys/errors.hpp"

namespace linsys {

Site::Site(int d) : dim_(d) {
  if (d < 0 || d > kMaxDim) throw InvalidParameter("site dimension out of range");
}

Site::Site(std::initializer_list<int> coords) : dim_(static_cast<std::int32_t>(coords.size())) {
  if (coords.size() > static_cast<std::size_t>(kMaxDim))
    throw InvalidParameter("site dimension out of range");
  std::size_t i = 0;
  for (int v : coords) c_[i++] = v;
}

Site::Site(const std::vector<int>& coords) : dim_(static_cast<std::int32_t>(coords.size())) {
  if (coords.size() > static_cast<std::size_t>(kMaxDim))
    throw InvalidParameter("site dimension out of range");
  for (std::size_t i = 0; i < coords.size(); ++i) c_[i] = coords[i];
}

Site Site::unit(int d, int axis, int sign) {
  Site s(d);
  s[axis] = sign;
  return s;
}

int Site::l1_norm() const {
  int n = 0;
  for (int i = 0; i < dim_; ++i) n += std::abs(c_[static_cast<std::size_t>(i)]);
  return n;
}

int Site::linf_norm() const {
  int n = 0;
  for (int i = 0; i < dim_; ++i) n = std::max(n, std::abs(c_[static_cast<std::size_t>(i)]));
  return n;
}

bool Site::is_origin() const {
  for (int i = 0; i < dim_; ++i)
    if (c_[static_cast<std::size_t>(i)] != 0) return false;
  return true;
}

Site Site::operator+(const Site& o) const {
  Site r(*this);
  for (std::size_t i = 0; i < static_cast<std::size_t>(kMaxDim); ++i) r.c_[i] += o.c_[i];
  return r;
}

Site Site::operator-(const Site& o) const {
  Site r(*this);
  for (std::size_t i = 0; i < static_cast<std::size_t>(kMaxDim); ++i) r.c_[i] -= o.c_[i];
  return r;
}

Site Site::operator-() const {
  Site r(*this);
  for (auto& v : r.c_) v = -v;
  return r;
}

std::vector<int> Site::coords() const {
  return {c_.begin(), c_.begin() + dim_};
}

std::string Site::str() const {
  std::string out = "(";
  for (int i = 0; i < dim_; ++i) {
    if (i) out += ",";
    out += std::to_string(c_[static_cast<std::size_t>(i)]);
  }
  return out + ")";
}

std::size_t SiteHash::operator()(const Site& s) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(s[i])) + 0x9e3779b97f4a7c15ULL +
         (h << 6) + (h >> 2);
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return static_cast<std::size_t>(h);
}

namespace {

template <class Keep>
void enumerate_box(int d, int radius, Keep keep, std::vector<Site>& out) {
  Site cur(d);
  for (int i = 0; i < d; ++i) cur[i] = -radius;
  if (d == 0) {
    out.push_back(cur);
    return;
  }
  while (true) {
    if (keep(cur)) out.push_back(cur);
    int axis = d - 1;
    while (axis >= 0 && cur[axis] == radius) {
      cur[axis] = -radius;
      --axis;
    }
    if (axis < 0) break;
    ++cur[axis];
  }
}

}  // namespace

std::vector<Site> l1_ball(int d, int radius) {
  std::vector<Site> out;
  enumerate_box(d, radius, [radius](const Site& s) { return s.l1_norm() <= radius; }, out);
  return out;
}

std::vector<Site> linf_box(int d, int radius) {
  std::vector<Site> out;
  enumerate_box(d, radius, [](const Site&) { return true; }, out);
  return out;
}

}  // namespace linsys
