#include "linsys/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "linsys/errors.hpp"

namespace linsys {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMaxGridPoints = std::size_t{1} << 25;

double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

int box_radius(std::span<const Site> xs) {
  int r = 0;
  for (const Site& x : xs) r = std::max(r, x.linf_norm());
  return r;
}

double characteristic(int d, std::span<const std::pair<Site, double>> p, const double* theta) {
  double s = 0.0;
  for (const auto& [y, w] : p) {
    double phase = 0.0;
    for (int j = 0; j < d; ++j) phase += y[j] * theta[j];
    s += w * std::cos(phase);
  }
  return s;
}

/// Trapezoid rule on the N^d torus grid for (1 - chi) / (1 - phat), contracted
/// against e^{i x.theta} for every x in the box [-R, R]^d.
std::vector<double> torus_part(int d, std::span<const std::pair<Site, double>> p, int n, int radius,
                               const FourierOptions& opt) {
  const double h = 2.0 * kPi / n;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) grid[static_cast<std::size_t>(k)] = -kPi + h * k;

  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(n);

  // Axis 0 varies fastest.
  Eigen::VectorXd f(static_cast<Eigen::Index>(total));
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> theta(static_cast<std::size_t>(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) {
      theta[static_cast<std::size_t>(j)] = grid[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      r2 += theta[static_cast<std::size_t>(j)] * theta[static_cast<std::size_t>(j)];
    }
    const double outer = 1.0 - smooth_cutoff(std::sqrt(r2), opt.inner_radius, opt.outer_radius);
    f(static_cast<Eigen::Index>(flat)) = outer > 0.0 ? outer / (1.0 - characteristic(d, p, theta.data())) : 0.0;
    for (int j = 0; j < d; ++j) {
      if (++idx[static_cast<std::size_t>(j)] < n) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }

  const int len = 2 * radius + 1;
  Eigen::MatrixXcd e(len, n);
  for (int m = -radius; m <= radius; ++m)
    for (int k = 0; k < n; ++k) e(m + radius, k) = std::polar(1.0, m * grid[static_cast<std::size_t>(k)]);

  // Contract one axis at a time; each pass rotates the contracted axis to the back.
  Eigen::MatrixXcd cur = f.cast<cplx>();
  for (int pass = 0; pass < d; ++pass) {
    Eigen::Map<Eigen::MatrixXcd> view(cur.data(), n, static_cast<Eigen::Index>(cur.size() / n));
    Eigen::MatrixXcd next = view.transpose() * e.transpose();
    cur = Eigen::Map<Eigen::MatrixXcd>(next.data(), next.size(), 1);
  }
  // Remaining layout: x_0 fastest, offsets by radius.
  const double scale = 1.0 / static_cast<double>(total);
  std::vector<double> out(static_cast<std::size_t>(cur.size()));
  for (Eigen::Index i = 0; i < cur.size(); ++i) out[static_cast<std::size_t>(i)] = cur(i).real() * scale;
  return out;
}

std::size_t box_offset(const Site& x, int radius) {
  const std::size_t len = static_cast<std::size_t>(2 * radius + 1);
  std::size_t off = 0;
  std::size_t stride = 1;
  for (int j = 0; j < x.dim(); ++j) {
    off += static_cast<std::size_t>(x[j] + radius) * stride;
    stride *= len;
  }
  return off;
}

/// Spherical-coordinate rule on |theta| < outer for chi / (1 - phat): Gauss
/// nodes in r and in every polar angle, trapezoid in the azimuth. The node set
/// is symmetric under theta -> -theta, so only half the azimuths are visited.
std::vector<double> ball_part(int d, std::span<const std::pair<Site, double>> p, int n,
                              std::span<const Site> xs, const FourierOptions& opt) {
  const GaussRule g = gauss_legendre(n);
  const double b = opt.outer_radius;
  const int polar = d - 2;
  const int azimuths = n;
  const double w_az = 2.0 * (2.0 * kPi / (2.0 * n));
  const double norm = std::pow(2.0 * kPi, -d);

  std::vector<double> rs(static_cast<std::size_t>(n)), rw(static_cast<std::size_t>(n));
  std::vector<double> phis(static_cast<std::size_t>(n)), phiw(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rs[static_cast<std::size_t>(i)] = 0.5 * b * (1.0 + g.nodes[static_cast<std::size_t>(i)]);
    rw[static_cast<std::size_t>(i)] = 0.5 * b * g.weights[static_cast<std::size_t>(i)];
    phis[static_cast<std::size_t>(i)] = 0.5 * kPi * (1.0 + g.nodes[static_cast<std::size_t>(i)]);
    phiw[static_cast<std::size_t>(i)] = 0.5 * kPi * g.weights[static_cast<std::size_t>(i)];
  }

  const int radius = box_radius(xs);
  const std::size_t len = static_cast<std::size_t>(2 * radius + 1);
  std::vector<double> acc(xs.size(), 0.0);
  std::vector<double> re(static_cast<std::size_t>(d) * len), im(re.size());
  std::vector<std::size_t> offsets;
  for (const Site& x : xs)
    for (int j = 0; j < d; ++j)
      offsets.push_back(static_cast<std::size_t>(j) * len + static_cast<std::size_t>(x[j] + radius));
  std::vector<double> theta(static_cast<std::size_t>(d));
  std::vector<double> omega(static_cast<std::size_t>(d));
  std::vector<int> pidx(static_cast<std::size_t>(std::max(polar, 0)), 0);

  for (;;) {
    // Angular part of the point set: unit vector omega and its weight.
    double ang_w = w_az;
    double sprod = 1.0;
    for (int j = 0; j < polar; ++j) {
      const double phi = phis[static_cast<std::size_t>(pidx[static_cast<std::size_t>(j)])];
      omega[static_cast<std::size_t>(j)] = sprod * std::cos(phi);
      ang_w *= phiw[static_cast<std::size_t>(pidx[static_cast<std::size_t>(j)])] *
               std::pow(std::sin(phi), polar - j);
      sprod *= std::sin(phi);
    }
    for (int l = 0; l < azimuths; ++l) {
      const double psi = 2.0 * kPi * l / (2.0 * n);
      omega[static_cast<std::size_t>(d - 2)] = sprod * std::cos(psi);
      omega[static_cast<std::size_t>(d - 1)] = sprod * std::sin(psi);
      for (int i = 0; i < n; ++i) {
        const double r = rs[static_cast<std::size_t>(i)];
        const double cut = smooth_cutoff(r, opt.inner_radius, opt.outer_radius);
        if (cut == 0.0) continue;
        for (int j = 0; j < d; ++j) theta[static_cast<std::size_t>(j)] = r * omega[static_cast<std::size_t>(j)];
        const double denom = 1.0 - characteristic(d, p, theta.data());
        const double c = norm * ang_w * rw[static_cast<std::size_t>(i)] * std::pow(r, d - 1) * cut / denom;
        for (int j = 0; j < d; ++j)
          for (int m = -radius; m <= radius; ++m) {
            const std::size_t t = static_cast<std::size_t>(j) * len + static_cast<std::size_t>(m + radius);
            re[t] = std::cos(m * theta[static_cast<std::size_t>(j)]);
            im[t] = std::sin(m * theta[static_cast<std::size_t>(j)]);
          }
        for (std::size_t q = 0; q < xs.size(); ++q) {
          const std::size_t* o = offsets.data() + q * static_cast<std::size_t>(d);
          double zr = re[o[0]];
          double zi = im[o[0]];
          for (int j = 1; j < d; ++j) {
            const double ar = re[o[j]];
            const double ai = im[o[j]];
            const double nr = zr * ar - zi * ai;
            zi = zr * ai + zi * ar;
            zr = nr;
          }
          acc[q] += c * zr;
        }
      }
    }
    int j = 0;
    for (; j < polar; ++j) {
      if (++pidx[static_cast<std::size_t>(j)] < n) break;
      pidx[static_cast<std::size_t>(j)] = 0;
    }
    if (j == polar) break;
  }
  return acc;
}

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InvalidParameter("Gauss rule needs at least one node");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = 2.0 * v * v;
  }
  // Symmetrize: the exact rule is symmetric about 0.
  for (int i = 0; i < n / 2; ++i) {
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const double x = 0.5 * (rule.nodes[hi] - rule.nodes[lo]);
    const double w = 0.5 * (rule.weights[hi] + rule.weights[lo]);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

double smooth_cutoff(double r, double inner, double outer) {
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  const double s = (outer - r) / (outer - inner);
  const double a = bump(s);
  return a / (a + bump(1.0 - s));
}

bool generates_lattice(int d, std::span<const Site> vectors) {
  std::vector<std::vector<long long>> rows;
  for (const Site& v : vectors) {
    std::vector<long long> row(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) row[static_cast<std::size_t>(j)] = v[j];
    rows.push_back(std::move(row));
  }
  // Integer row reduction to echelon form by repeated Euclid steps.
  std::size_t top = 0;
  for (int col = 0; col < d; ++col) {
    const auto c = static_cast<std::size_t>(col);
    for (;;) {
      std::size_t pivot = rows.size();
      for (std::size_t i = top; i < rows.size(); ++i)
        if (rows[i][c] != 0 && (pivot == rows.size() || std::llabs(rows[i][c]) < std::llabs(rows[pivot][c])))
          pivot = i;
      if (pivot == rows.size()) return false;
      std::swap(rows[top], rows[pivot]);
      bool done = true;
      for (std::size_t i = top + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        const long long q = rows[i][c] / rows[top][c];
        for (std::size_t j = c; j < static_cast<std::size_t>(d); ++j) rows[i][j] -= q * rows[top][j];
        if (rows[i][c] != 0) done = false;
      }
      if (done) break;
    }
    if (std::llabs(rows[top][c]) != 1) return false;
    ++top;
  }
  return true;
}

FourierResult lattice_green_integral(int d, std::span<const std::pair<Site, double>> p,
                                     std::span<const Site> xs, const FourierOptions& options) {
  if (d < 3) throw DivergentGreenFunction("the lattice Green function diverges for d <= 2");
  std::vector<Site> support;
  for (const auto& [y, w] : p) {
    if (y.is_origin()) throw InvalidParameter("jump law must vanish at the origin");
    support.push_back(y);
  }
  if (!generates_lattice(d, support))
    throw InvalidParameter("support of the jump law does not generate Z^d");

  FourierResult res;
  const int radius = box_radius(xs);

  std::vector<double> torus_prev;
  std::vector<double> torus;
  double torus_err = std::numeric_limits<double>::infinity();
  for (int n : options.torus_levels) {
    if (ipow(static_cast<std::size_t>(n), d) > kMaxGridPoints && !torus.empty()) break;
    torus_prev = std::move(torus);
    torus = torus_part(d, p, n, radius, options);
    res.torus_nodes = n;
    if (!torus_prev.empty()) {
      torus_err = max_diff(torus, torus_prev);
      if (torus_err < 0.5 * options.tolerance) break;
    }
  }

  std::vector<Site> probe{Site(d)};
  if (!xs.empty()) {
    std::size_t far = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double r2 = 0.0;
      for (int j = 0; j < d; ++j) r2 += double(xs[i][j]) * xs[i][j];
      if (r2 > best) {
        best = r2;
        far = i;
      }
    }
    if (!xs[far].is_origin()) probe.push_back(xs[far]);
  }
  std::vector<double> ball_prev;
  std::vector<double> ball_probe;
  double ball_err = std::numeric_limits<double>::infinity();
  for (int n : options.ball_levels) {
    if (ipow(static_cast<std::size_t>(n), d) / 2 > kMaxGridPoints && !ball_probe.empty()) break;
    ball_prev = std::move(ball_probe);
    ball_probe = ball_part(d, p, n, probe, options);
    res.ball_nodes = n;
    if (!ball_prev.empty()) {
      ball_err = max_diff(ball_probe, ball_prev);
      if (ball_err < 0.5 * options.tolerance) break;
    }
  }
  const std::vector<double> ball = ball_part(d, p, res.ball_nodes, xs, options);

  res.values.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    res.values[i] = torus[box_offset(xs[i], radius)] + ball[i];
  res.error_estimate = torus_err + ball_err;
  res.converged = res.error_estimate < options.tolerance;
  return res;
}

}  // namespace linsys
