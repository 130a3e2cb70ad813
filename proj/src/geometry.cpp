#include "lipctl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "lipctl/errors.hpp"

namespace lipctl::geometry {

// ---------------------------------------------------------------- Box

Box::Box(Point lo, Point hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) throw InputError("box corners have different dimensions");
  if (lo_.empty()) throw InputError("box of dimension 0");
  for (std::size_t k = 0; k < lo_.size(); ++k) {
    if (lo_[k] > hi_[k]) throw InputError("box with lo > hi in coordinate " + std::to_string(k));
  }
}

Box Box::cube(std::span<const Scalar> center, const Scalar& rad) {
  if (rad < 0) throw InputError("negative cube radius");
  Point lo(center.begin(), center.end());
  Point hi(center.begin(), center.end());
  for (std::size_t k = 0; k < lo.size(); ++k) {
    lo[k] -= rad;
    hi[k] += rad;
  }
  return Box(std::move(lo), std::move(hi));
}

Scalar Box::volume() const {
  Scalar v = 1;
  for (std::size_t k = 0; k < dim(); ++k) v *= hi_[k] - lo_[k];
  return v;
}

Point Box::center() const {
  Point c(dim());
  for (std::size_t k = 0; k < dim(); ++k) c[k] = (lo_[k] + hi_[k]) / 2;
  return c;
}

bool Box::degenerate() const {
  for (std::size_t k = 0; k < dim(); ++k)
    if (lo_[k] == hi_[k]) return true;
  return false;
}

bool Box::contains(std::span<const Scalar> p) const {
  for (std::size_t k = 0; k < dim(); ++k)
    if (p[k] < lo_[k] || p[k] > hi_[k]) return false;
  return true;
}

bool Box::contains(const Box& other) const {
  for (std::size_t k = 0; k < dim(); ++k)
    if (other.lo_[k] < lo_[k] || other.hi_[k] > hi_[k]) return false;
  return true;
}

bool Box::intersects(const Box& other) const {
  for (std::size_t k = 0; k < dim(); ++k)
    if (other.hi_[k] < lo_[k] || other.lo_[k] > hi_[k]) return false;
  return true;
}

bool Box::interiors_overlap(const Box& other) const {
  for (std::size_t k = 0; k < dim(); ++k)
    if (other.hi_[k] <= lo_[k] || other.lo_[k] >= hi_[k]) return false;
  return true;
}

std::optional<Box> Box::intersection(const Box& other) const {
  if (!intersects(other)) return std::nullopt;
  Point lo(dim()), hi(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    lo[k] = std::max(lo_[k], other.lo_[k]);
    hi[k] = std::min(hi_[k], other.hi_[k]);
  }
  return Box(std::move(lo), std::move(hi));
}

Box Box::expanded(const Scalar& r) const {
  Point lo = lo_, hi = hi_;
  for (std::size_t k = 0; k < dim(); ++k) {
    lo[k] -= r;
    hi[k] += r;
  }
  return Box(std::move(lo), std::move(hi));
}

// ---------------------------------------------------------------- internals

class RegionBuilder {
 public:
  static Region make(std::size_t dim, std::vector<Box> boxes) { return Region(dim, std::move(boxes), 0); }
};

namespace {

// Outward-rounded double bounds, used only to skip exact comparisons on
// boxes that are certainly far apart.
struct Bounds {
  std::vector<double> lo, hi;

  explicit Bounds(const Box& b) : lo(b.dim()), hi(b.dim()) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < b.dim(); ++k) {
      lo[k] = std::nextafter(b.lo(k).get_d(), -inf);
      hi[k] = std::nextafter(b.hi(k).get_d(), inf);
    }
  }

  bool apart(const Bounds& o) const {
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (hi[k] < o.lo[k] || o.hi[k] < lo[k]) return true;
    return false;
  }
};

void guard(std::size_t count, const Limits& limits) {
  if (count > limits.max_boxes) {
    throw ResourceError("region exceeds the box-count limit of " + std::to_string(limits.max_boxes));
  }
}

// Guillotine split of p against a closed box a whose closed intersection with
// p is nonempty. The pieces lie in p, cover p \ a, and each piece lies in a
// closed half-space bounded by a facet of a.
void split_against(const Box& p, const Box& a, std::vector<Box>& out) {
  Point lo = p.lo(), hi = p.hi();
  for (std::size_t k = 0; k < p.dim(); ++k) {
    if (lo[k] < a.lo(k)) {
      Point phi = hi;
      phi[k] = a.lo(k);
      out.emplace_back(lo, std::move(phi));
    }
    if (hi[k] > a.hi(k)) {
      Point plo = lo;
      plo[k] = a.hi(k);
      out.emplace_back(std::move(plo), hi);
    }
    lo[k] = std::max(lo[k], a.lo(k));
    hi[k] = std::min(hi[k], a.hi(k));
  }
}

// Whether subtracting a from p can change p's contribution to a union.
// A full box is only cut by full boxes whose interior it meets; a degenerate
// box is cut by anything it touches.
bool cuts(const Box& p, bool p_degenerate, const Box& a, bool a_degenerate) {
  if (!p_degenerate) return !a_degenerate && p.interiors_overlap(a);
  return p.intersects(a);
}

struct Entry {
  Box box;
  Bounds bounds;
  bool degenerate;

  explicit Entry(Box b) : box(std::move(b)), bounds(box), degenerate(box.degenerate()) {}
};

// Removes from `incoming` everything already covered by `accepted`, then
// appends what is left. Pieces are interior-disjoint from all accepted boxes.
void absorb(std::vector<Entry>& accepted, Box incoming, const Limits& limits) {
  std::vector<Box> pieces{std::move(incoming)};
  std::vector<Box> next;
  for (std::size_t ai = 0; ai < accepted.size() && !pieces.empty(); ++ai) {
    const Entry& a = accepted[ai];
    next.clear();
    for (auto& p : pieces) {
      Bounds pb(p);
      bool pdeg = p.degenerate();
      if (pb.apart(a.bounds) || !cuts(p, pdeg, a.box, a.degenerate)) {
        next.push_back(std::move(p));
        continue;
      }
      if (a.box.contains(p)) continue;
      split_against(p, a.box, next);
    }
    std::swap(pieces, next);
    guard(pieces.size() + accepted.size(), limits);
  }
  for (auto& p : pieces) accepted.emplace_back(std::move(p));
  guard(accepted.size(), limits);
}

// Merges full boxes that share an entire facet, axis by axis, until stable.
std::vector<Box> merge_facets(std::vector<Box> boxes) {
  bool changed = true;
  while (changed) {
    changed = false;
    if (boxes.empty()) break;
    std::size_t dim = boxes.front().dim();
    for (std::size_t axis = 0; axis < dim; ++axis) {
      std::map<std::vector<Scalar>, std::vector<std::size_t>> groups;
      std::vector<Box> kept;
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (boxes[i].degenerate()) {
          kept.push_back(boxes[i]);
          continue;
        }
        std::vector<Scalar> key;
        key.reserve(2 * dim - 2);
        for (std::size_t k = 0; k < dim; ++k) {
          if (k == axis) continue;
          key.push_back(boxes[i].lo(k));
          key.push_back(boxes[i].hi(k));
        }
        groups[std::move(key)].push_back(i);
      }
      for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return boxes[a].lo(axis) < boxes[b].lo(axis); });
        Point lo = boxes[members[0]].lo(), hi = boxes[members[0]].hi();
        for (std::size_t t = 1; t < members.size(); ++t) {
          const Box& b = boxes[members[t]];
          if (b.lo(axis) == hi[axis]) {
            hi[axis] = b.hi(axis);
            changed = true;
          } else {
            kept.emplace_back(lo, hi);
            lo = b.lo();
            hi = b.hi();
          }
        }
        kept.emplace_back(std::move(lo), std::move(hi));
      }
      boxes = std::move(kept);
    }
  }
  return boxes;
}

// Canonical-ish ordering so results do not depend on hash or pointer order.
void sort_boxes(std::vector<Box>& boxes) {
  std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
    if (a.lo() != b.lo()) return a.lo() < b.lo();
    return a.hi() < b.hi();
  });
}

std::vector<Box> disjointify(std::vector<Box> boxes, const Limits& limits) {
  // Full boxes first, larger first; degenerate boxes last so that they are
  // trimmed against everything with positive measure.
  std::vector<std::pair<Scalar, std::size_t>> order;
  order.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) order.emplace_back(boxes[i].volume(), i);
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<Entry> accepted;
  accepted.reserve(boxes.size());
  for (auto& [vol, idx] : order) absorb(accepted, std::move(boxes[idx]), limits);

  std::vector<Box> out;
  out.reserve(accepted.size());
  for (auto& e : accepted) out.push_back(std::move(e.box));
  out = merge_facets(std::move(out));
  sort_boxes(out);
  return out;
}

void check_dim(const Region& r, std::size_t dim, const char* what) {
  if (r.dim() != dim) throw InputError(std::string(what) + ": dimension mismatch");
}

}  // namespace

// ---------------------------------------------------------------- Region

Region Region::from_disjoint(std::size_t dim, std::vector<Box> boxes) {
  for (const auto& b : boxes)
    if (b.dim() != dim) throw InputError("box dimension differs from region dimension");
  Region r(dim, std::move(boxes), 0);
  if (!r.is_valid()) throw InputError("boxes are not pairwise interior-disjoint");
  return r;
}

Region Region::union_of(std::size_t dim, std::vector<Box> boxes, const Limits& limits) {
  for (const auto& b : boxes)
    if (b.dim() != dim) throw InputError("box dimension differs from region dimension");
  return Region(dim, disjointify(std::move(boxes), limits), 0);
}

Region Region::point(std::span<const Scalar> p) {
  Point pt(p.begin(), p.end());
  return Region(pt.size(), {Box(pt, pt)}, 0);
}

bool Region::contains(std::span<const Scalar> p) const {
  for (const auto& b : boxes_)
    if (b.contains(p)) return true;
  return false;
}

bool Region::is_valid() const {
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    if (boxes_[i].dim() != dim_) return false;
    for (std::size_t k = 0; k < dim_; ++k)
      if (boxes_[i].lo(k) > boxes_[i].hi(k)) return false;
    for (std::size_t j = i + 1; j < boxes_.size(); ++j)
      if (boxes_[i].interiors_overlap(boxes_[j])) return false;
  }
  return true;
}

// ---------------------------------------------------------------- operations

Region minkowski_expand(const Region& region, const Scalar& r, const Limits& limits) {
  if (r < 0) throw InputError("minkowski_expand: negative radius");
  if (r == 0 || region.empty()) return region;
  std::vector<Box> grown;
  grown.reserve(region.size());
  for (const auto& b : region.boxes()) grown.push_back(b.expanded(r));
  return RegionBuilder::make(region.dim(), disjointify(std::move(grown), limits));
}

Region subtract_cube(const Region& region, std::span<const Scalar> center, const Scalar& rad, bool open,
                     const Limits& limits) {
  if (rad <= 0) throw InputError("subtract_cube: radius must be positive");
  if (center.size() != region.dim()) throw InputError("subtract_cube: center dimension mismatch");

  const std::size_t dim = region.dim();
  Point clo(dim), chi(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    clo[k] = center[k] - rad;
    chi[k] = center[k] + rad;
  }

  std::vector<Box> full;
  std::vector<Box> faces;
  bool touched = false;
  for (const auto& b : region.boxes()) {
    bool disjoint = false;
    for (std::size_t k = 0; k < dim && !disjoint; ++k) {
      disjoint = open ? (b.hi(k) <= clo[k] || b.lo(k) >= chi[k]) : (b.hi(k) < clo[k] || b.lo(k) > chi[k]);
    }
    if (disjoint) {
      (b.degenerate() ? faces : full).push_back(b);
      continue;
    }
    touched = true;
    Point lo = b.lo(), hi = b.hi();
    for (std::size_t k = 0; k < dim; ++k) {
      // open cube: the slab x_k <= c_k - rad survives including its face
      // closed cube: only x_k < c_k - rad survives, kept as its closure
      bool below = open ? lo[k] <= clo[k] : lo[k] < clo[k];
      bool above = open ? hi[k] >= chi[k] : hi[k] > chi[k];
      if (below) {
        Point phi = hi;
        phi[k] = clo[k];
        Box piece(lo, std::move(phi));
        (piece.degenerate() ? faces : full).push_back(std::move(piece));
      }
      if (above) {
        Point plo = lo;
        plo[k] = chi[k];
        Box piece(std::move(plo), hi);
        (piece.degenerate() ? faces : full).push_back(std::move(piece));
      }
      lo[k] = std::max(lo[k], clo[k]);
      hi[k] = std::min(hi[k], chi[k]);
    }
    guard(full.size() + faces.size(), limits);
  }
  if (!touched) return region;

  // Full pieces are subsets of the original interior-disjoint boxes, so only
  // the degenerate faces need trimming against the rest.
  std::vector<Entry> accepted;
  accepted.reserve(full.size() + faces.size());
  for (auto& b : full) accepted.emplace_back(std::move(b));
  for (auto& f : faces) absorb(accepted, std::move(f), limits);

  std::vector<Box> out;
  out.reserve(accepted.size());
  for (auto& e : accepted) out.push_back(std::move(e.box));
  out = merge_facets(std::move(out));
  sort_boxes(out);
  guard(out.size(), limits);
  return RegionBuilder::make(dim, std::move(out));
}

Region intersect_cube(const Region& region, std::span<const Scalar> center, const Scalar& rad) {
  if (rad < 0) throw InputError("intersect_cube: negative radius");
  if (center.size() != region.dim()) throw InputError("intersect_cube: center dimension mismatch");
  Box c = Box::cube(center, rad);
  std::vector<Box> out;
  for (const auto& b : region.boxes()) {
    if (auto x = b.intersection(c)) out.push_back(std::move(*x));
  }
  // Intersections of interior-disjoint boxes are interior-disjoint, but a
  // degenerate piece may now sit inside a full one.
  std::vector<Box> full, faces;
  for (auto& b : out) (b.degenerate() ? faces : full).push_back(std::move(b));
  if (faces.empty()) return RegionBuilder::make(region.dim(), std::move(full));
  std::vector<Entry> accepted;
  for (auto& b : full) accepted.emplace_back(std::move(b));
  for (auto& f : faces) absorb(accepted, std::move(f), Limits{});
  std::vector<Box> result;
  for (auto& e : accepted) result.push_back(std::move(e.box));
  sort_boxes(result);
  return RegionBuilder::make(region.dim(), std::move(result));
}

Scalar measure(const Region& region) {
  Scalar total = 0;
  for (const auto& b : region.boxes()) total += b.volume();
  return total;
}

std::optional<Point> pick_point(const Region& region) {
  if (region.empty()) return std::nullopt;
  const Box* best = nullptr;
  Scalar best_vol;
  for (const auto& b : region.boxes()) {
    Scalar v = b.volume();
    if (!best || v > best_vol || (v == best_vol && b.lo() < best->lo())) {
      best = &b;
      best_vol = v;
    }
  }
  return best->center();
}

bool contains(const Region& outer, const Region& inner) {
  check_dim(outer, inner.dim(), "contains");
  std::vector<Bounds> obounds;
  obounds.reserve(outer.size());
  for (const auto& a : outer.boxes()) obounds.emplace_back(a);

  for (const auto& b : inner.boxes()) {
    std::vector<Box> pieces{b};
    std::vector<Box> next;
    for (std::size_t ai = 0; ai < outer.size() && !pieces.empty(); ++ai) {
      const Box& a = outer.boxes()[ai];
      next.clear();
      for (auto& p : pieces) {
        if (Bounds(p).apart(obounds[ai]) || !p.intersects(a)) {
          next.push_back(std::move(p));
        } else if (a.contains(p)) {
          // covered
        } else if (!p.degenerate() && !p.interiors_overlap(a)) {
          next.push_back(std::move(p));
        } else {
          split_against(p, a, next);
        }
      }
      std::swap(pieces, next);
    }
    if (!pieces.empty()) return false;
  }
  return true;
}

// ---------------------------------------------------------------- text format

void write_region(std::ostream& os, const Region& region) {
  os << "region 1 " << region.dim() << ' ' << region.size() << '\n';
  for (const auto& b : region.boxes()) {
    for (std::size_t k = 0; k < region.dim(); ++k) {
      if (k) os << ' ';
      os << format_scalar(b.lo(k)) << ' ' << format_scalar(b.hi(k));
    }
    os << '\n';
  }
}

Region read_region(std::istream& is) {
  std::string tag;
  int version = 0;
  std::size_t dim = 0, count = 0;
  if (!(is >> tag >> version >> dim >> count) || tag != "region" || version != 1 || dim == 0) {
    throw InputError("bad region header (expected 'region 1 <dim> <count>')");
  }
  std::vector<Box> boxes;
  boxes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point lo(dim), hi(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      std::string a, b;
      if (!(is >> a >> b)) throw InputError("truncated region record " + std::to_string(i));
      lo[k] = parse_scalar(a);
      hi[k] = parse_scalar(b);
    }
    boxes.emplace_back(std::move(lo), std::move(hi));
  }
  return Region::from_disjoint(dim, std::move(boxes));
}

std::string to_text(const Region& region) {
  std::ostringstream os;
  write_region(os, region);
  return os.str();
}

Region region_from_text(const std::string& text) {
  std::istringstream is(text);
  return read_region(is);
}

}  // namespace lipctl::geometry
