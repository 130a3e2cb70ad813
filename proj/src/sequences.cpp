#include "lipctl/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "lipctl/errors.hpp"

namespace lipctl::sequences {

void PointSeq::push(Point p) {
  if (p.size() != m) throw InputError("point dimension differs from sequence dimension");
  labels.push_back(points.size());
  points.push_back(std::move(p));
}

PointSeq sorted_by_norm(const PointSeq& s) {
  std::vector<Scalar> norms;
  norms.reserve(s.size());
  for (const auto& p : s.points) norms.push_back(norm_inf(p));
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
  PointSeq out;
  out.m = s.m;
  out.approximate = s.approximate;
  out.error_bound = s.error_bound;
  out.points.reserve(s.size());
  out.labels.reserve(s.size());
  for (auto i : order) {
    out.points.push_back(s.points[i]);
    out.labels.push_back(s.labels.empty() ? i : s.labels[i]);
  }
  return out;
}

DensityReport counting_function(const PointSeq& s, std::size_t d, std::size_t n_max) {
  if (n_max < 1) throw InputError("counting_function: n_max must be >= 1");
  if (d < 1) throw InputError("counting_function: d must be >= 1");
  std::vector<Scalar> norms;
  norms.reserve(s.size());
  for (const auto& p : s.points) norms.push_back(norm_inf(p));
  std::sort(norms.begin(), norms.end());

  DensityReport rep;
  rep.d = d;
  rep.n_max = n_max;
  for (std::size_t n = 1; n <= n_max; ++n) {
    Scalar bound(static_cast<unsigned long>(n));
    auto it = std::upper_bound(norms.begin(), norms.end(), bound);
    std::size_t count = static_cast<std::size_t>(it - norms.begin());
    rep.counts.push_back(count);
    Scalar ratio = Scalar(static_cast<unsigned long>(count)) / pow_int(bound, static_cast<unsigned>(d));
    rep.running_sup.push_back(rep.ratios.empty() ? ratio : std::max(ratio, rep.running_sup.back()));
    rep.ratios.push_back(std::move(ratio));
  }
  return rep;
}

std::size_t local_count(const PointSeq& s, std::span<const Scalar> x, const Scalar& alpha) {
  if (alpha <= 0) throw InputError("local_count: alpha must be positive");
  if (x.size() != s.m) throw InputError("local_count: dimension mismatch");
  std::size_t count = 0;
  for (const auto& p : s.points) {
    bool inside = true;
    for (std::size_t k = 0; k < s.m && inside; ++k) inside = abs(p[k] - x[k]) < alpha;
    if (inside) ++count;
  }
  return count;
}

namespace {

// Calls fn on every integer vector in [lo, hi]^m, lexicographic order.
template <typename Fn>
void for_each_lattice(std::size_t m, long lo, long hi, Fn&& fn) {
  if (lo > hi) return;
  std::vector<long> a(m, lo);
  while (true) {
    fn(a);
    std::size_t k = m;
    while (k > 0) {
      --k;
      if (a[k] < hi) {
        ++a[k];
        break;
      }
      a[k] = lo;
      if (k == 0) return;
    }
  }
}

void check_cap(double estimate, std::size_t cap, const char* what) {
  if (estimate > static_cast<double>(cap)) {
    throw ResourceError(std::string(what) + ": about " + std::to_string(static_cast<long long>(estimate)) +
                        " points exceeds the cap of " + std::to_string(cap));
  }
}

}  // namespace

PointSeq gen_lattice(std::size_t m, long R, std::size_t cap) {
  if (m < 1) throw InputError("gen_lattice: m must be >= 1");
  if (R < 0) throw InputError("gen_lattice: R must be >= 0");
  check_cap(std::pow(2.0 * R + 1, static_cast<double>(m)), cap, "gen_lattice");
  PointSeq s;
  s.m = m;
  for_each_lattice(m, -R, R, [&](const std::vector<long>& a) {
    Point p(m);
    for (std::size_t k = 0; k < m; ++k) p[k] = a[k];
    s.push(std::move(p));
  });
  return s;
}

PointSeq gen_pow2(std::size_t d, std::size_t K, std::size_t cap) {
  if (d < 1 || K < 1) throw InputError("gen_pow2: d and K must be >= 1");
  double total = 0;
  for (std::size_t k = 1; k <= K; ++k) total += static_cast<double>(k) * std::pow(2.0, static_cast<double>(k * d));
  check_cap(total, cap, "gen_pow2");
  PointSeq s;
  s.m = 1;
  for (std::size_t k = 1; k <= K; ++k) {
    Integer value = 1;
    value <<= k;
    Integer copies = 1;
    copies <<= k * d;
    copies *= static_cast<unsigned long>(k);
    for (unsigned long c = 0; c < copies.get_ui(); ++c) s.push(Point{Scalar(value)});
  }
  return s;
}

PointSeq gen_power_grid(std::size_t m, const Scalar& c, const Scalar& R, std::size_t cap) {
  if (m < 1) throw InputError("gen_power_grid: m must be >= 1");
  if (c <= 0) throw InputError("gen_power_grid: c must be positive");
  const unsigned long p = c.get_num().get_ui();
  const unsigned long q = c.get_den().get_ui();
  if (Integer(p) != c.get_num() || Integer(q) != c.get_den()) throw InputError("gen_power_grid: exponent too large");

  constexpr unsigned kBits = 48;
  std::vector<Scalar> values;  // n^c for n = 1, 2, ... while <= R
  bool approximate = false;
  for (unsigned long n = 1;; ++n) {
    Integer np;
    mpz_ui_pow_ui(np.get_mpz_t(), n, p);
    Scalar v;
    if (q == 1) {
      v = Scalar(np);
    } else {
      v = dyadic_root_lower(Scalar(np), static_cast<unsigned>(q), kBits);
      if (pow_int(v, static_cast<unsigned>(q)) != Scalar(np)) approximate = true;
    }
    if (v > R) break;
    values.push_back(std::move(v));
    check_cap(std::pow(static_cast<double>(values.size()), static_cast<double>(m)), cap, "gen_power_grid");
  }

  PointSeq s;
  s.m = m;
  if (approximate) {
    s.approximate = true;
    s.error_bound = Scalar(1, 1) / pow_int(Scalar(2), kBits);
  }
  if (values.empty()) return s;
  for_each_lattice(m, 0, static_cast<long>(values.size()) - 1, [&](const std::vector<long>& a) {
    Point pt(m);
    for (std::size_t k = 0; k < m; ++k) pt[k] = values[static_cast<std::size_t>(a[k])];
    s.push(std::move(pt));
  });
  return s;
}

SparseLevelSet gen_sparse_levels(std::size_t m, std::size_t d, const GrowthFn& growth, std::size_t levels, std::size_t cap) {
  if (m < 1 || m > d) throw InputError("gen_sparse_levels: need 1 <= m <= d");
  if (levels < 1) throw InputError("gen_sparse_levels: levels must be >= 1");

  SparseLevelSet out;
  out.seq.m = m;
  // c_1 .. c_{levels+1}
  Integer prev = 4;
  for (std::size_t i = 1; i <= levels + 1; ++i) {
    Integer threshold = 1;
    threshold <<= m * (i + 2) + d;
    Integer c = 8;
    while (c <= prev || growth(Scalar(c - 2)) <= Scalar(threshold)) {
      c <<= 1;
      if (mpz_sizeinbase(c.get_mpz_t(), 2) > 62) {
        throw InputError("gen_sparse_levels: growth function too slow to place threshold c_" + std::to_string(i));
      }
    }
    out.thresholds.emplace_back(c);
    prev = c;
  }

  const unsigned excess = static_cast<unsigned>(d - m);
  double estimate = 0;
  for (std::size_t i = 1; i <= levels; ++i) {
    double outer = 2.0 * out.thresholds[i].get_d() * std::pow(2.0, static_cast<double>(i));
    double inner = 2.0 * out.thresholds[i - 1].get_d() * std::pow(2.0, static_cast<double>(i));
    double anchors = std::pow(outer, static_cast<double>(m)) - std::pow(inner, static_cast<double>(m));
    estimate += anchors * std::pow(out.thresholds[i].get_d(), static_cast<double>(excess));
  }
  check_cap(estimate, cap, "gen_sparse_levels");

  for (std::size_t i = 1; i <= levels; ++i) {
    const Scalar step = Scalar(1) / pow_int(Scalar(2), static_cast<unsigned>(i));
    const Scalar& lo = out.thresholds[i - 1];
    const Scalar& hi = out.thresholds[i];
    // integer coordinates a with x = a * step, c_i <= |x| < c_{i+1}
    const long reach = Scalar(hi / step).get_num().get_si() - 1;
    const long inner = Scalar(lo / step).get_num().get_si();
    for_each_lattice(m, -reach, reach, [&](const std::vector<long>& a) {
      long na = 0;
      for (long v : a) na = std::max(na, std::labs(v));
      if (na < inner) return;
      Point x(m);
      for (std::size_t k = 0; k < m; ++k) x[k] = Scalar(a[k]) * step;
      Scalar nx = norm_inf(x);
      Integer copies = ceil_int(pow_int(nx, excess));
      unsigned long kc = copies.get_ui();
      for (unsigned long t = 0; t < kc; ++t) {
        // offsets strictly inside (-step, step) along the first axis
        Point p = x;
        Scalar frac(Integer(2 * t + 1), Integer(kc));
        frac.canonicalize();
        p[0] += step * (frac - 1);
        out.seq.push(std::move(p));
        out.level.push_back(i);
        out.anchor.push_back(x);
      }
      if (out.seq.size() > cap) throw ResourceError("gen_sparse_levels: cap exceeded");
    });
  }
  return out;
}

void write_seq(std::ostream& os, const PointSeq& s) {
  os << "pointseq 1 " << s.m << ' ' << s.size() << '\n';
  for (const auto& p : s.points) {
    for (std::size_t k = 0; k < s.m; ++k) {
      if (k) os << ' ';
      os << format_scalar(p[k]);
    }
    os << '\n';
  }
}

PointSeq read_seq(std::istream& is) {
  std::string tag;
  int version = 0;
  std::size_t m = 0, count = 0;
  if (!(is >> tag >> version >> m >> count) || tag != "pointseq" || version != 1 || m == 0) {
    throw InputError("bad sequence header (expected 'pointseq 1 <m> <count>')");
  }
  PointSeq s;
  s.m = m;
  s.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point p(m);
    for (std::size_t k = 0; k < m; ++k) {
      std::string tok;
      if (!(is >> tok)) throw InputError("truncated sequence at entry " + std::to_string(i));
      p[k] = parse_scalar(tok);
    }
    s.push(std::move(p));
  }
  return s;
}

}  // namespace lipctl::sequences
