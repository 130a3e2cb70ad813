#pragma once

// Input point sequences, their density statistics, and generators for the
// example sequences discussed alongside the control results.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "lipctl/scalar.hpp"

namespace lipctl::sequences {

inline constexpr std::size_t kDefaultCap = 5'000'000;

/// Finite truncation of a sequence (x_i) in R^m. Repeated entries encode
/// multiplicity. `labels[i]` is the original index of entry i and survives
/// re-sorting.
struct PointSeq {
  std::size_t m = 1;
  std::vector<Point> points;
  std::vector<std::size_t> labels;
  // Set when coordinates are rational stand-ins for irrational values;
  // `error_bound` then bounds the per-coordinate error.
  bool approximate = false;
  Scalar error_bound = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void push(Point p);
};

/// Copy sorted by max norm (stable); labels travel with their points.
PointSeq sorted_by_norm(const PointSeq& s);

struct DensityReport {
  std::size_t d = 1;
  std::size_t n_max = 0;
  std::vector<std::size_t> counts;  // counts[n-1] = |{i : |x_i| <= n}|
  std::vector<Scalar> ratios;       // counts[n-1] / n^d
  std::vector<Scalar> running_sup;  // max of ratios[0..n-1]

  const Scalar& sup_ratio() const { return running_sup.back(); }
};

DensityReport counting_function(const PointSeq& s, std::size_t d, std::size_t n_max);

/// |{i : |x_i - x| < alpha}| in the max norm.
std::size_t local_count(const PointSeq& s, std::span<const Scalar> x, const Scalar& alpha);

/// All points of Z^m with |x| <= R, lexicographic order.
PointSeq gen_lattice(std::size_t m, long R, std::size_t cap = kDefaultCap);

/// k * 2^(k d) copies of 2^k for k = 1..K, as a one-dimensional sequence.
PointSeq gen_pow2(std::size_t d, std::size_t K, std::size_t cap = kDefaultCap);

/// Points (n_1^c, ..., n_m^c) with n_k >= 1 and |x| <= R. Non-integer
/// powers are truncated to a multiple of 2^-48 and flagged approximate.
PointSeq gen_power_grid(std::size_t m, const Scalar& c, const Scalar& R, std::size_t cap = kDefaultCap);

/// Monotone nondecreasing growth function f : R+ -> R+ with f -> infinity.
using GrowthFn = std::function<Scalar(const Scalar&)>;

struct SparseLevelSet {
  PointSeq seq;
  std::vector<Scalar> thresholds;    // c_1 .. c_{levels+1}
  std::vector<std::size_t> level;    // level i of each entry (1-based)
  std::vector<Point> anchor;         // grid point each entry was emitted for
};

/// Explicit controlling set whose local counts stay within f(|x|) |x|^(d-m).
/// c_i is the smallest power of two above max(4, c_{i-1}) with
/// f(c_i - 2) > 2^(m(i+2)+d); every x of 2^-i Z^m with c_i <= |x| < c_{i+1}
/// receives ceil(|x|^(d-m)) points spread along the first axis inside its
/// 2^-i cube.
SparseLevelSet gen_sparse_levels(std::size_t m, std::size_t d, const GrowthFn& growth, std::size_t levels,
                       std::size_t cap = kDefaultCap);

/// "pointseq 1 <m> <count>" then one point per line, coordinates as num/den.
void write_seq(std::ostream& os, const PointSeq& s);
PointSeq read_seq(std::istream& is);

}  // namespace lipctl::sequences
