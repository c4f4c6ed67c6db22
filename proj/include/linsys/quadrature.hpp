#pragma once

#include <span>
#include <utility>
#include <vector>

#include "linsys/site.hpp"

namespace linsys {

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

/// Smooth radial cutoff: 1 on [0, inner], 0 on [outer, inf), C-infinity in between.
double smooth_cutoff(double r, double inner, double outer);

/// Controls for the lattice Green integral. The integrand is split with a
/// smooth radial cutoff: the part away from theta = 0 is periodic and smooth,
/// so the trapezoid rule on an N^d grid converges spectrally; the part near
/// the origin is integrated in spherical coordinates, where r^{d-1} cancels
/// the 1/|theta|^2 singularity.
struct FourierOptions {
  double tolerance = 1e-10;
  double inner_radius = 0.4;
  double outer_radius = 3.0;
  std::vector<int> torus_levels = {32, 48, 64, 96, 128, 192};
  std::vector<int> ball_levels = {16, 24, 32, 40, 48, 56, 64, 80, 96};
};

struct FourierResult {
  std::vector<double> values;
  /// Difference between the last two refinement levels (both parts summed).
  double error_estimate = 0.0;
  bool converged = false;
  int torus_nodes = 0;
  int ball_nodes = 0;
};

/// (2 pi)^{-d} int_{[-pi,pi]^d} cos(x.theta) / (1 - phat(theta)) dtheta at each
/// x, where phat(theta) = sum_y p(y) cos(y.theta) for a symmetric law p with
/// p(0) = 0 whose support generates Z^d. Requires d >= 3.
FourierResult lattice_green_integral(int d, std::span<const std::pair<Site, double>> p,
                                     std::span<const Site> xs, const FourierOptions& options = {});

/// True if the integer span of the given vectors is all of Z^d.
bool generates_lattice(int d, std::span<const Site> vectors);

}  // namespace linsys
