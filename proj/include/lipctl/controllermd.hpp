#pragma once

// Controlling pairs for sequences in R^m, m <= d, with respect to one class
// of j-Lipschitz functions. Coordinates of x are (z, t): z in R^(m-1), t the
// last coordinate. D x J = [-t0, t0]^(m-1) x [t0, t1] is tiled by eps-balls;
// each eps-ball receives one index per 1/2-ball covering the part of the
// sphere |y| = l that the section map sends into it, and the balls touching
// t = t1 additionally receive one index per new ball covering |y| <= l.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lipctl/feasibility.hpp"
#include "lipctl/geometry.hpp"
#include "lipctl/sequences.hpp"

namespace lipctl::controllermd {

using feasibility::ControlPair;

struct MdParams {
  unsigned long j = 0;
  std::size_t m = 0;
  std::size_t d = 0;
  Scalar eps;
  Integer c;
  Scalar alpha;
  Scalar t0;
  Scalar t1;
  long l = 0;

  /// 4d (2l)^(d-m)
  Integer half_quota() const;
  /// 4d (2l)^(d-m) + (2l)^d
  Integer far_quota() const;
  /// Number of eps-balls per z axis and along t.
  long z_cells() const;
  long t_cells() const;
  std::size_t ball_count() const;
};

/// Closed-form parameters for given t0 < t1. Throws InputError unless
/// t0 > j + 1 and m <= d.
MdParams make_params(unsigned long j, std::size_t m, std::size_t d, const Scalar& t0, const Scalar& t1);

/// Checks every stated parameter inequality exactly.
bool params_consistent(const MdParams& p);

/// Smallest t0 on the grid j + 1 + k/4 (k >= 1), then smallest t1 = t0 + k/4,
/// such that every eps-ball holds at least half_quota() sequence points in its
/// interior and every ball touching t = t1 at least far_quota().
/// Throws NotDenseEnoughError naming the first deficient ball otherwise.
MdParams derive_params(const sequences::PointSeq& s, unsigned long j, std::size_t d);

/// (t0 / 2l) (y_1 - y_m, ..., y_(m-1) - y_m)
Point linear_map_g(std::span<const Scalar> y, const MdParams& p);
std::vector<double> linear_map_g(std::span<const double> y, const MdParams& p);

/// The eps-balls covering D x J, lexicographic in (z, t).
std::vector<geometry::Box> epsilon_cover(const MdParams& p);

/// Index into epsilon_cover of the ball with lattice coordinates `cell`.
std::size_t ball_index(const MdParams& p, std::span<const long> cell);

/// Points strictly inside each eps-ball (count per ball, cover order).
std::vector<std::size_t> ball_counts(const sequences::PointSeq& s, const MdParams& p);

/// Centers of the 1/2-balls covering {y : |y| = l, g(y) in Z_0}, facet by
/// facet in the order y_1 = -l, y_1 = l, y_2 = -l, ...
std::vector<Point> half_balls_for(const geometry::Box& z, const MdParams& p);

/// Centers of the (2l)^d unit cubes tiling |y| <= l.
std::vector<Point> new_ball_centers(const MdParams& p);

struct ZRecord {
  geometry::Box box;
  bool far_slab = false;
  std::vector<Point> half_centers;
  std::vector<std::size_t> half_indices;  // sequence labels, one per half center
  std::vector<std::size_t> new_indices;   // one per new ball center when far_slab
};

struct BallAssignment {
  MdParams params;
  std::vector<ZRecord> balls;
  std::vector<Point> new_centers;
  std::vector<ControlPair> pairs;  // flat list; pair.index is the sequence label
};

BallAssignment build_md(const sequences::PointSeq& s, unsigned long j, std::size_t d);
/// Assignment for fixed parameters; throws InsufficientPointsError if a ball
/// runs out of points.
BallAssignment build_md(const sequences::PointSeq& s, const MdParams& p);

/// First eps-ball (closed) containing x.
std::optional<std::size_t> ball_containing(const BallAssignment& a, std::span<const Scalar> x);

void write_params(std::ostream& os, const MdParams& p);
void write_assignment(std::ostream& os, const BallAssignment& a);

}  // namespace lipctl::controllermd
