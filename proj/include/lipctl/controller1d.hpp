#pragma once

// Explicit controlling pairs for sequences on the real line.
//
// For fixed j and n, k = (j(n+1)+1)^d points in [0, n] suffice to control
// every j-Lipschitz f : R -> R^d with |f(0)| <= j: tile the cube of radius
// r = j(n+1) by k cubes of radius r/(r+1), order the tile centers z_i
// lexicographically decreasing, and shift them by the drift j(n - x_i) v.

#include <cstddef>
#include <span>
#include <vector>

#include "lipctl/feasibility.hpp"
#include "lipctl/sequences.hpp"

namespace lipctl::controller1d {

using feasibility::ControlPair;

/// (j(n+1)+1)^d
Integer block_size(unsigned long j, unsigned long n, std::size_t d);

/// Centers of the (r+1)^d tiles of radius r/(r+1) that partition the cube
/// of radius r = j(n+1), in lexicographically decreasing order.
std::vector<Point> tile_centers(unsigned long j, unsigned long n, std::size_t d);

/// Pairs for the first k entries of `xs` (sorted, inside [0, n]). `labels`
/// names the sequence index of each x; defaults to its position.
std::vector<ControlPair> build_block(unsigned long j, unsigned long n, std::size_t d, std::span<const Scalar> xs,
                                     std::span<const std::size_t> labels = {});

struct ScheduledBlock {
  unsigned long j = 0;
  unsigned long n = 0;
  std::vector<ControlPair> pairs;
};

struct Schedule {
  std::vector<ScheduledBlock> blocks;
  std::vector<ControlPair> pairs() const;
};

/// Blocks for j = 1..J over disjoint index sets. For each j, n(j) is the
/// smallest integer n with at least k(j, n) unused entries <= n; the smallest
/// such entries are consumed.
Schedule build_schedule(const sequences::PointSeq& s, std::size_t d, unsigned long J);

/// `count` pairs at x_star whose y values walk a breadth-first dyadic
/// refinement of the cube of radius `side`: level L lists the centers of the
/// 2^(L d) subcubes in lexicographic order, skipping centers already listed.
std::vector<ControlPair> dense_cluster_pairs(const Scalar& x_star, std::size_t count, std::size_t d,
                                             const Scalar& side);

}  // namespace lipctl::controller1d
