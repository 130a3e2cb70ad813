#pragma once

// Approximate boundary crossings of a moving map f : D x [t0, t1] -> R^d with a
// section map g : B -> D, found as near-fixed points of the retracted map
//   (y, t) -> c(f(g(y), t), t - |f(g(y), t)| + l).
// Double precision throughout; results are certified only up to the
// reported residuals.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace lipctl::fixedpoint {

using Vec = std::vector<double>;

struct MovingMap {
  std::size_t zdim = 0;  // dimension of D (m - 1)
  std::size_t d = 1;
  double l = 1;         // radius of B
  double t0 = 0, t1 = 1;
  double z_radius = 0;  // D = [-z_radius, z_radius]^zdim
  double lipschitz = 0;  // declared, informational
  std::function<Vec(const Vec& z, double t)> f;
  std::function<Vec(const Vec& y)> g;
};

double norm_inf(const Vec& v);

/// Coordinate-wise retraction onto B x [t0, t1].
std::pair<Vec, double> retract(const Vec& y, double t, double l, double t0, double t1);

struct Crossing {
  Vec z;
  double t = 0;
  Vec y;                     // f(z, t)
  double sphere_residual = 0;   // | |f(z,t)| - l |
  double section_residual = 0;  // |g(f(z,t)) - z|
  double displacement = 0;      // fixed-point residual of the retracted map
  std::size_t evaluations = 0;
};

struct SearchOptions {
  double grid_step = 0;   // 0: (t1 - t0) / 64
  double tol = 0;         // 0: 1e-6 * l
  unsigned levels = 12;   // halvings of the local search box
  std::size_t starts = 8; // coarse candidates refined
  std::size_t max_evaluations = 20'000'000;
};

/// Checks |f(z, t0)| < l and |f(z, t1)| > l on the coarse z grid (throws
/// HypothesisError), then scans and refines. Throws NotFoundError with the
/// best residuals if the tolerance is not met.
Crossing find_crossing(const MovingMap& map, const SearchOptions& opts = {});

}  // namespace lipctl::fixedpoint
