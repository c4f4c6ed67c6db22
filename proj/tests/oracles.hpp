#pragma once

// Reference computations used as test oracles. They work on plain maps of
// coordinate vectors and share no code with the library.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Point = std::vector<int>;
using Field = std::map<Point, double>;

inline Point add(const Point& a, const Point& b) {
  Point c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline Point sub(const Point& a, const Point& b) {
  Point c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

inline double get(const Field& f, const Point& x) {
  auto it = f.find(x);
  return it == f.end() ? 0.0 : it->second;
}

inline Field convolve(const Field& f, const Field& h) {
  Field out;
  for (const auto& [y, fy] : f)
    for (const auto& [z, hz] : h) out[add(y, z)] += fy * hz;
  return out;
}

/// sum_{x,y} g(x - y) a(x) b(y)
inline double bilinear(const Field& g, const Field& a, const Field& b) {
  double s = 0.0;
  for (const auto& [x, ax] : a)
    for (const auto& [y, by] : b) s += get(g, sub(x, y)) * ax * by;
  return s;
}

struct Atom {
  double prob;
  Field xi;
};

struct Drift {
  double drift = 0.0, u = 0.0, v = 0.0, w = 0.0, s = 0.0, extinction = 0.0;
};

/// Builds J = rho + (xi - delta_0)(. - z) rho_z for every site and atom and
/// evaluates the double sums directly.
inline Drift drift(const Field& rho, const std::vector<Atom>& atoms, const Field& g) {
  Drift out;
  out.s = bilinear(g, rho, rho);
  const Point origin(rho.begin()->first.size(), 0);
  for (const auto& [z, rz] : rho) {
    for (const Atom& a : atoms) {
      double total = 0.0;
      for (const auto& [o, v] : a.xi) total += v;
      Field j = rho;
      for (const auto& [o, v] : a.xi) j[add(z, o)] += v * rz;
      j[z] -= rz;
      const double u = bilinear(g, j, j) - out.s;
      const double b = total - 1.0;
      out.u += a.prob * u;
      out.v += a.prob * b * rz * u;
      out.w += a.prob * b * rz * out.s;
      const double m = 1.0 + b * rz;
      if (m <= 0.0) {
        out.extinction += a.prob;
        continue;
      }
      Field jb;
      for (const auto& [x, v] : j) jb[x] = v / m;
      out.drift += a.prob * (bilinear(g, jb, jb) - out.s);
    }
  }
  return out;
}

/// e^{-z} I_0(z).
inline double scaled_i0(double z) {
  if (z < 40.0) return std::exp(-z) * std::cyl_bessel_i(0.0, z);
  const double r = 1.0 / (8.0 * z);
  // Asymptotic series with coefficients ((2k-1)!!)^2 / k!.
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= (2.0 * k - 1.0) * (2.0 * k - 1.0) * r / k;
    sum += term;
  }
  return sum / std::sqrt(2.0 * M_PI * z);
}

/// Green function at the origin of the discrete-time simple random walk on
/// Z^3, as int_0^inf (e^{-t/3} I_0(t/3))^3 dt (continuous-time embedding).
inline double srw3_green_origin() {
  auto f = [](double t) {
    const double v = scaled_i0(t / 3.0);
    return v * v * v;
  };
  // t = e^u - 1 on [0, ln(1 + T)], Simpson; tail from the t^{-3/2} asymptote
  // with its first correction.
  const double T = 1e6;
  const int n = 400000;
  const double umax = std::log1p(T);
  const double h = umax / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = i * h;
    const double t = std::expm1(u);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * f(t) * (t + 1.0);
  }
  s *= h / 3.0;
  const double c = std::pow(3.0 / (2.0 * M_PI), 1.5);
  s += c * (2.0 / std::sqrt(T) + (9.0 / 8.0) * (2.0 / 3.0) * std::pow(T, -1.5));
  return s;
}

/// Event-driven simulation with raw masses and clocks on every site of a
/// fixed box. Atom and site choices come from std::mt19937_64 + std::
/// distributions, so this is independent of the library's random streams.
struct RawOutcome {
  double normalized_mass = 0.0;
  double overlap = 0.0;
  bool alive = false;
};

inline RawOutcome raw_superset_run(int d, double lambda, double t_end, int box, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<Point> sites;
  Point p(d, -box);
  for (;;) {
    sites.push_back(p);
    int i = 0;
    while (i < d && ++p[i] > box) p[i++] = -box;
    if (i == d) break;
  }
  Field eta;
  eta[Point(d, 0)] = 1.0;
  const double denom = 2.0 * d * lambda + 1.0;
  std::exponential_distribution<double> hold(static_cast<double>(sites.size()));
  std::uniform_int_distribution<std::size_t> pick(0, sites.size() - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  for (;;) {
    t += hold(eng);
    if (t > t_end) break;
    const Point& z = sites[pick(eng)];
    const double u = unif(eng) * denom;
    auto it = eta.find(z);
    if (it == eta.end()) continue;
    const double ez = it->second;
    if (u >= 2.0 * d * lambda) {
      eta.erase(it);
      if (eta.empty()) break;
      continue;
    }
    const int k = static_cast<int>(u / lambda);
    Point y = z;
    y[k / 2] += (k % 2 == 0) ? 1 : -1;
    eta[y] += ez;
  }
  RawOutcome o;
  double total = 0.0, sq = 0.0;
  for (const auto& [x, v] : eta) {
    total += v;
    sq += v * v;
  }
  o.alive = total > 0.0;
  const double k_norm = 4.0 * d * lambda / denom;
  o.normalized_mass = total * std::exp(-(k_norm - 1.0) * t_end);
  o.overlap = o.alive ? sq / (total * total) : 0.0;
  return o;
}

}  // namespace oracle
