#include "lipctl/controllermd.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "lipctl/errors.hpp"

namespace lipctl::controllermd {

namespace {

Integer ipow(const Integer& b, std::size_t e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

// 1 / (2 eps) = 4 (j + 1)
Integer inv_width(unsigned long j) { return Integer(4) * Integer(j + 1); }

// Flat cell index of x among nz^(m-1) x rows cells anchored at
// (-t0, ..., -t0, t0), or nullopt when x is not interior to any cell.
std::optional<std::size_t> interior_cell(std::span<const Scalar> x, const Scalar& t0, const Integer& inv, long nz,
                                         long rows) {
  const std::size_t m = x.size();
  std::size_t flat = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const bool time = (k + 1 == m);
    Scalar u = time ? Scalar((x[k] - t0) * inv) : Scalar((x[k] + t0) * inv);
    if (u.get_den() == 1) return std::nullopt;  // on a cell boundary
    if (u <= 0) return std::nullopt;
    Integer a = floor_int(u);
    const long lim = time ? rows : nz;
    if (a >= lim) return std::nullopt;
    flat = flat * static_cast<std::size_t>(lim) + a.get_ui();
  }
  return flat;
}

std::vector<std::size_t> count_cells(const sequences::PointSeq& s, const Scalar& t0, const Integer& inv, long nz,
                                     long rows) {
  std::size_t total = static_cast<std::size_t>(rows);
  for (std::size_t k = 0; k + 1 < s.m; ++k) total *= static_cast<std::size_t>(nz);
  std::vector<std::size_t> counts(total, 0);
  for (const auto& x : s.points) {
    if (auto c = interior_cell(x, t0, inv, nz, rows)) ++counts[*c];
  }
  return counts;
}

Point cell_center(std::size_t flat, std::size_t m, const Scalar& t0, const Scalar& eps, long nz, long rows) {
  Point c(m);
  for (std::size_t k = m; k-- > 0;) {
    const bool time = (k + 1 == m);
    const long lim = time ? rows : nz;
    const long a = static_cast<long>(flat % static_cast<std::size_t>(lim));
    flat /= static_cast<std::size_t>(lim);
    Scalar off = eps * Scalar(2 * a + 1);
    c[k] = time ? Scalar(t0 + off) : Scalar(-t0 + off);
  }
  return c;
}

std::string point_text(std::span<const Scalar> p) {
  std::string s = "(";
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k) s += ", ";
    s += format_scalar(p[k]);
  }
  return s + ")";
}

struct Interval {
  Scalar lo, hi;
  bool empty() const { return lo > hi; }
  Interval meet(const Interval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
  Scalar mid() const { return (lo + hi) / 2; }
  Scalar width() const { return hi - lo; }
};

// Appends every combination of tile centers on `free_axes` to the partial
// center `base`.
void tile_free_axes(Point base, const std::vector<std::size_t>& free_axes, long l, std::vector<Point>& out) {
  if (free_axes.empty()) {
    out.push_back(std::move(base));
    return;
  }
  std::vector<long> idx(free_axes.size(), 0);
  while (true) {
    for (std::size_t q = 0; q < free_axes.size(); ++q) base[free_axes[q]] = Scalar(-l + idx[q]) + Scalar(1, 2);
    out.push_back(base);
    std::size_t q = free_axes.size();
    while (q > 0) {
      --q;
      if (idx[q] + 1 < 2 * l) {
        ++idx[q];
        break;
      }
      idx[q] = 0;
      if (q == 0) return;
    }
  }
}

}  // namespace

Integer MdParams::half_quota() const {
  return Integer(4) * Integer(static_cast<unsigned long>(d)) * ipow(Integer(2 * l), d - m);
}

Integer MdParams::far_quota() const { return half_quota() + ipow(Integer(2 * l), d); }

long MdParams::z_cells() const {
  if (m < 2) return 1;
  return ceil_int(t0 / eps).get_si();
}

long MdParams::t_cells() const { return ceil_int((t1 - t0) / (2 * eps)).get_si(); }

std::size_t MdParams::ball_count() const {
  std::size_t n = static_cast<std::size_t>(t_cells());
  for (std::size_t k = 0; k + 1 < m; ++k) n *= static_cast<std::size_t>(z_cells());
  return n;
}

MdParams make_params(unsigned long j, std::size_t m, std::size_t d, const Scalar& t0, const Scalar& t1) {
  if (j < 1) throw InputError("controllermd: j must be >= 1");
  if (m < 1 || m > d) throw InputError("controllermd: need 1 <= m <= d");
  if (t0 <= Scalar(static_cast<long>(j + 1))) throw InputError("controllermd: t0 must exceed j + 1");
  if (t1 <= t0) throw InputError("controllermd: t1 must exceed t0");
  MdParams p;
  p.j = j;
  p.m = m;
  p.d = d;
  p.eps = Scalar(1) / Scalar(static_cast<long>(8 * j + 8));
  // c minimal with c^m > 4d (8j+8)^(d-m)
  Integer target = Integer(4) * Integer(static_cast<unsigned long>(d)) * ipow(Integer(8 * j + 8), d - m);
  Integer c;
  mpz_root(c.get_mpz_t(), target.get_mpz_t(), m);
  while (ipow(c, m) <= target) ++c;
  while (c > 1 && ipow(c - 1, m) > target) --c;
  p.c = c;
  p.alpha = p.eps / Scalar(c);
  p.t0 = t0;
  p.t1 = t1;
  p.l = Integer(floor_int(Scalar(static_cast<long>(j)) * t0 + Scalar(static_cast<long>(j))) + 1).get_si();
  return p;
}

bool params_consistent(const MdParams& p) {
  const Scalar jj(static_cast<long>(p.j));
  if (p.eps != Scalar(1) / Scalar(static_cast<long>(8 * p.j + 8))) return false;
  if (Scalar(ipow(p.c, p.m)) <= Scalar(4 * static_cast<long>(p.d)) / pow_int(p.eps, static_cast<unsigned>(p.d - p.m)))
    return false;
  if (p.c > 1 && Scalar(ipow(p.c - 1, p.m)) >
                     Scalar(4 * static_cast<long>(p.d)) / pow_int(p.eps, static_cast<unsigned>(p.d - p.m)))
    return false;
  if (p.alpha != p.eps / Scalar(p.c)) return false;
  if (p.t0 <= jj + 1 || p.t1 <= p.t0) return false;
  const Scalar ll(p.l);
  if (ll != Scalar(floor_int(jj * p.t0 + jj) + 1)) return false;
  if (!(ll < (jj + 1) * p.t0)) return false;
  if (8 * ll * p.eps / p.t0 > 1) return false;
  return true;
}

MdParams derive_params(const sequences::PointSeq& s, unsigned long j, std::size_t d) {
  if (s.m < 1 || s.m > d) throw InputError("derive_params: need 1 <= m <= d");
  if (j < 1) throw InputError("derive_params: j must be >= 1");
  Scalar horizon = 0;
  for (const auto& x : s.points) horizon = std::max(horizon, norm_inf(x));

  const Scalar quarter(1, 4);
  const Integer inv = inv_width(j);
  const long rows_per_quarter = static_cast<long>(j + 1);  // 1/4 = (j+1) * 2 eps
  std::string first_failure;
  std::size_t tried = 0;

  for (Scalar t0 = Scalar(static_cast<long>(j + 1)) + quarter; t0 + quarter <= horizon; t0 += quarter) {
    ++tried;
    MdParams p = make_params(j, s.m, d, t0, t0 + quarter);
    const long nz = p.z_cells();
    // rows reaching up to the horizon
    const long rows = std::max(1L, ceil_int((horizon - t0) * Scalar(inv)).get_si());
    std::vector<std::size_t> counts = count_cells(s, t0, inv, nz, rows);
    const std::size_t per_row = counts.size() / static_cast<std::size_t>(rows);
    const std::size_t q0 = p.half_quota().get_ui();
    const std::size_t q1 = p.far_quota().get_ui();

    // flat index of the first ball in row r with fewer than q points
    auto deficient = [&](long r, std::size_t q) -> std::optional<std::size_t> {
      for (std::size_t zc = 0; zc < per_row; ++zc) {
        std::size_t f = zc * static_cast<std::size_t>(rows) + static_cast<std::size_t>(r);
        if (counts[f] < q) return f;
      }
      return std::nullopt;
    };

    long good_rows = 0;  // leading rows meeting q0
    while (good_rows < rows && !deficient(good_rows, q0)) ++good_rows;

    for (long k = 1; k * rows_per_quarter <= rows; ++k) {
      const long top = k * rows_per_quarter - 1;
      if (top > good_rows) break;
      if (!deficient(top, q1)) {
        p.t1 = t0 + quarter * Scalar(k);
        if (!params_consistent(p)) throw InternalError("derive_params: parameter inequalities fail");
        return p;
      }
    }

    if (first_failure.empty()) {
      long row;
      std::size_t q;
      std::optional<std::size_t> f;
      if (good_rows == 0) {
        row = 0, q = q0, f = deficient(0, q0);
      } else if (rows_per_quarter - 1 <= good_rows && rows_per_quarter - 1 < rows) {
        row = rows_per_quarter - 1, q = q1, f = deficient(row, q1);
      } else {
        row = std::min(good_rows, rows - 1), q = q0, f = deficient(row, q0);
      }
      std::ostringstream msg;
      msg << "at t0=" << format_scalar(t0) << ", t1=" << format_scalar(t0 + 2 * p.eps * Scalar(row + 1));
      if (f) {
        Point c = cell_center(*f, s.m, t0, p.eps, nz, rows);
        msg << ": eps-ball centered " << point_text(c) << " holds " << counts[*f] << " points, needs " << q;
      }
      first_failure = msg.str();
    }
  }
  if (tried == 0) {
    throw NotDenseEnoughError("derive_params: sequence radius " + format_scalar(horizon) +
                              " leaves no room for t0 > " + std::to_string(j + 1));
  }
  throw NotDenseEnoughError("derive_params: no t0 among " + std::to_string(tried) +
                            " candidates meets the quotas; first failure " + first_failure);
}

Point linear_map_g(std::span<const Scalar> y, const MdParams& p) {
  if (y.size() != p.d) throw InputError("linear_map_g: dimension mismatch");
  Scalar scale = p.t0 / Scalar(2 * p.l);
  Point z(p.m - 1);
  for (std::size_t i = 0; i + 1 < p.m; ++i) z[i] = scale * (y[i] - y[p.m - 1]);
  return z;
}

std::vector<double> linear_map_g(std::span<const double> y, const MdParams& p) {
  if (y.size() != p.d) throw InputError("linear_map_g: dimension mismatch");
  double scale = to_double(p.t0) / static_cast<double>(2 * p.l);
  std::vector<double> z(p.m - 1);
  for (std::size_t i = 0; i + 1 < p.m; ++i) z[i] = scale * (y[i] - y[p.m - 1]);
  return z;
}

std::vector<geometry::Box> epsilon_cover(const MdParams& p) {
  const long nz = p.z_cells();
  const long rows = p.t_cells();
  std::vector<geometry::Box> out;
  out.reserve(p.ball_count());
  for (std::size_t f = 0; f < p.ball_count(); ++f) {
    Point c = cell_center(f, p.m, p.t0, p.eps, nz, rows);
    out.push_back(geometry::Box::cube(c, p.eps));
  }
  return out;
}

std::size_t ball_index(const MdParams& p, std::span<const long> cell) {
  if (cell.size() != p.m) throw InputError("ball_index: dimension mismatch");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < p.m; ++k) {
    const long lim = (k + 1 == p.m) ? p.t_cells() : p.z_cells();
    if (cell[k] < 0 || cell[k] >= lim) throw InputError("ball_index: cell out of range");
    flat = flat * static_cast<std::size_t>(lim) + static_cast<std::size_t>(cell[k]);
  }
  return flat;
}

std::vector<std::size_t> ball_counts(const sequences::PointSeq& s, const MdParams& p) {
  if (s.m != p.m) throw InputError("ball_counts: dimension mismatch");
  return count_cells(s, p.t0, inv_width(p.j), p.z_cells(), p.t_cells());
}

std::vector<Point> half_balls_for(const geometry::Box& z, const MdParams& p) {
  if (z.dim() != p.m) throw InputError("half_balls_for: ball dimension differs from m");
  const std::size_t m = p.m, d = p.d;
  const Scalar ll(p.l);
  const Interval full{-ll, ll};
  const Scalar scale = Scalar(2 * p.l) / p.t0;
  if (8 * ll * p.eps / p.t0 > 1) throw InternalError("half_balls_for: facet confinement bound fails");

  // y_i - y_m in [A_i, B_i] for i < m - 1
  std::vector<Interval> diff(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) diff[i] = {scale * z.lo(i), scale * z.hi(i)};

  // values of y_m for which some y_i = y_m + diff_i lies in [-l, l]
  Interval ym_all = full;
  for (const auto& iv : diff) ym_all = ym_all.meet({-ll - iv.hi, ll - iv.lo});

  // ranges of y_1 .. y_(m-1) given y_m in `ym`
  auto induced = [&](const Interval& ym, Point& center) -> bool {
    for (std::size_t i = 0; i + 1 < m; ++i) {
      Interval r = Interval{ym.lo + diff[i].lo, ym.hi + diff[i].hi}.meet(full);
      if (r.empty()) return false;
      if (r.width() > 1) throw InternalError("half_balls_for: induced range wider than 1");
      center[i] = r.mid();
    }
    center[m - 1] = ym.mid();
    return true;
  };

  std::vector<Point> out;
  for (std::size_t k = 0; k < d; ++k) {
    for (int sgn : {-1, 1}) {
      const Scalar fixed = sgn < 0 ? Scalar(-ll) : ll;
      Point center(d);
      if (k < m) {
        Interval ym = ym_all;
        if (k == m - 1) {
          ym = ym.meet({fixed, fixed});
        } else {
          ym = ym.meet({fixed - diff[k].hi, fixed - diff[k].lo});
        }
        if (ym.empty()) continue;
        if (!induced(ym, center)) continue;
        center[k] = fixed;
        std::vector<std::size_t> free_axes;
        for (std::size_t q = m; q < d; ++q) free_axes.push_back(q);
        tile_free_axes(center, free_axes, p.l, out);
      } else {
        std::vector<std::size_t> free_axes;
        for (std::size_t q = m; q < d; ++q)
          if (q != k) free_axes.push_back(q);
        for (long b = 0; b < 4 * p.l; ++b) {
          Interval slab{-ll + Scalar(b, 2), -ll + Scalar(b + 1, 2)};
          slab.lo.canonicalize();
          slab.hi.canonicalize();
          Interval ym = slab.meet(ym_all);
          if (ym.empty()) continue;
          if (!induced(ym, center)) continue;
          center[k] = fixed;
          tile_free_axes(center, free_axes, p.l, out);
        }
      }
    }
  }
  if (Integer(static_cast<unsigned long>(out.size())) > p.half_quota())
    throw InternalError("half_balls_for: more 1/2-balls than 4d(2l)^(d-m)");
  return out;
}

std::vector<Point> new_ball_centers(const MdParams& p) {
  std::vector<Point> out;
  std::vector<std::size_t> axes(p.d);
  for (std::size_t k = 0; k < p.d; ++k) axes[k] = k;
  tile_free_axes(Point(p.d), axes, p.l, out);
  return out;
}

BallAssignment build_md(const sequences::PointSeq& s, unsigned long j, std::size_t d) {
  return build_md(s, derive_params(s, j, d));
}

BallAssignment build_md(const sequences::PointSeq& s, const MdParams& p) {
  if (s.m != p.m) throw InputError("build_md: dimension mismatch");
  const long nz = p.z_cells();
  const long rows = p.t_cells();
  const Integer inv = inv_width(p.j);

  BallAssignment a;
  a.params = p;
  a.new_centers = new_ball_centers(p);
  std::vector<geometry::Box> cover = epsilon_cover(p);

  // candidate sequence positions per ball, in sequence order
  std::vector<std::vector<std::size_t>> bucket(cover.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (auto c = interior_cell(s.points[i], p.t0, inv, nz, rows)) bucket[*c].push_back(i);
  }

  for (std::size_t b = 0; b < cover.size(); ++b) {
    ZRecord rec;
    rec.box = cover[b];
    rec.far_slab = rec.box.lo(p.m - 1) <= p.t1 && p.t1 <= rec.box.hi(p.m - 1);
    rec.half_centers = half_balls_for(rec.box, p);
    const std::size_t need = rec.half_centers.size() + (rec.far_slab ? a.new_centers.size() : 0);
    if (bucket[b].size() < need) {
      throw InsufficientPointsError("build_md: eps-ball centered " + point_text(rec.box.center()) + " holds " +
                                    std::to_string(bucket[b].size()) + " points, needs " + std::to_string(need));
    }
    std::size_t next = 0;
    auto take = [&](const Point& y) {
      const std::size_t pos = bucket[b][next++];
      const std::size_t label = s.labels.empty() ? pos : s.labels[pos];
      a.pairs.push_back({label, s.points[pos], y});
      return label;
    };
    for (const auto& y : rec.half_centers) rec.half_indices.push_back(take(y));
    if (rec.far_slab) {
      for (const auto& y : a.new_centers) rec.new_indices.push_back(take(y));
    }
    a.balls.push_back(std::move(rec));
  }
  return a;
}

std::optional<std::size_t> ball_containing(const BallAssignment& a, std::span<const Scalar> x) {
  for (std::size_t b = 0; b < a.balls.size(); ++b) {
    if (a.balls[b].box.contains(x)) return b;
  }
  return std::nullopt;
}

void write_params(std::ostream& os, const MdParams& p) {
  os << "j " << p.j << "\nm " << p.m << "\nd " << p.d << "\neps " << format_scalar(p.eps) << "\nc " << p.c.get_str()
     << "\nalpha " << format_scalar(p.alpha) << "\nt0 " << format_scalar(p.t0) << "\nt1 " << format_scalar(p.t1)
     << "\nl " << p.l << '\n';
}

void write_assignment(std::ostream& os, const BallAssignment& a) {
  const MdParams& p = a.params;
  os << "assignment 1 " << p.m << ' ' << p.d << ' ' << a.balls.size() << '\n';
  write_params(os, p);
  auto coords = [&](std::span<const Scalar> v) {
    for (const auto& c : v) os << ' ' << format_scalar(c);
  };
  for (std::size_t b = 0; b < a.balls.size(); ++b) {
    const ZRecord& r = a.balls[b];
    os << "ball " << b << " far " << (r.far_slab ? 1 : 0) << " lo";
    coords(r.box.lo());
    os << " hi";
    coords(r.box.hi());
    os << " half " << r.half_indices.size() << " new " << r.new_indices.size() << '\n';
    for (std::size_t q = 0; q < r.half_indices.size(); ++q) {
      os << "h " << r.half_indices[q];
      coords(r.half_centers[q]);
      os << '\n';
    }
    for (std::size_t q = 0; q < r.new_indices.size(); ++q) {
      os << "n " << r.new_indices[q];
      coords(a.new_centers[q]);
      os << '\n';
    }
  }
}

}  // namespace lipctl::controllermd
