#pragma once

// Exact max-norm box-union algebra.
//
// A Region is a closed subset of R^dim stored as a finite union of closed
// axis-aligned boxes with pairwise disjoint interiors. Boxes may be
// degenerate (lo == hi in some coordinate); such boxes carry no measure but
// keep boundary points that an evader is allowed to pass through.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipctl/scalar.hpp"

namespace lipctl::geometry {

class Box {
 public:
  Box() = default;
  /// Throws InputError unless lo[k] <= hi[k] for every k.
  Box(Point lo, Point hi);

  /// Closed cube of radius `rad` about `center` in the max norm.
  static Box cube(std::span<const Scalar> center, const Scalar& rad);

  std::size_t dim() const { return lo_.size(); }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  const Scalar& lo(std::size_t k) const { return lo_[k]; }
  const Scalar& hi(std::size_t k) const { return hi_[k]; }

  Scalar volume() const;
  Point center() const;
  bool degenerate() const;
  bool contains(std::span<const Scalar> p) const;
  bool contains(const Box& other) const;
  bool intersects(const Box& other) const;           // closed boxes
  bool interiors_overlap(const Box& other) const;    // open interiors
  std::optional<Box> intersection(const Box& other) const;
  Box expanded(const Scalar& r) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  Point lo_;
  Point hi_;
};

/// Operations refuse to produce regions with more boxes than this.
struct Limits {
  std::size_t max_boxes = 1'000'000;
};

class Region {
 public:
  explicit Region(std::size_t dim = 1) : dim_(dim) {}

  /// Wraps boxes that are already pairwise interior-disjoint. Validates the
  /// claim and throws InputError if it does not hold.
  static Region from_disjoint(std::size_t dim, std::vector<Box> boxes);

  /// Union of arbitrary (possibly overlapping) boxes.
  static Region union_of(std::size_t dim, std::vector<Box> boxes, const Limits& limits = {});

  static Region single(const Box& b) { return from_disjoint(b.dim(), {b}); }
  static Region point(std::span<const Scalar> p);

  std::size_t dim() const { return dim_; }
  const std::vector<Box>& boxes() const { return boxes_; }
  std::size_t size() const { return boxes_.size(); }
  bool empty() const { return boxes_.empty(); }
  bool contains(std::span<const Scalar> p) const;

  /// Pairwise interior-disjointness check over all boxes (quadratic).
  bool is_valid() const;

 private:
  Region(std::size_t dim, std::vector<Box> boxes, int /*trusted*/) : dim_(dim), boxes_(std::move(boxes)) {}
  friend class RegionBuilder;

  std::size_t dim_;
  std::vector<Box> boxes_;
};

/// {p : |p - q| <= r for some q in R}.
Region minkowski_expand(const Region& region, const Scalar& r, const Limits& limits = {});

/// R minus the open (open == true) or closed cube of radius `rad` about
/// `center`. The result is stored as closed boxes; with an open cube the
/// cube's boundary faces inside R survive, possibly as degenerate boxes; with
/// a closed cube the closure of the difference is kept.
Region subtract_cube(const Region& region, std::span<const Scalar> center, const Scalar& rad, bool open = true,
                     const Limits& limits = {});

/// R intersected with the closed cube of radius `rad` about `center`.
Region intersect_cube(const Region& region, std::span<const Scalar> center, const Scalar& rad);

/// Exact Lebesgue measure.
Scalar measure(const Region& region);

/// Center of the largest-volume box; ties go to the lexicographically
/// smallest lower corner. nullopt iff the region is empty.
std::optional<Point> pick_point(const Region& region);

/// Exact containment test: inner is a subset of outer.
bool contains(const Region& outer, const Region& inner);

/// Line-delimited text form. First line "region 1 <dim> <count>", then one
/// box per line: lo_1 hi_1 lo_2 hi_2 ... as "num/den" rationals.
std::string to_text(const Region& region);
Region region_from_text(const std::string& text);
void write_region(std::ostream& os, const Region& region);
Region read_region(std::istream& is);

}  // namespace lipctl::geometry
