#include "lipctl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>

#include "lipctl/errors.hpp"

namespace lipctl::harness {

long Rng::uniform(long lo, long hi) {
  if (lo > hi) throw InputError("Rng::uniform: empty range");
  const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  if (range == 0) return static_cast<long>(gen_());
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % range + 1) % range;
  std::uint64_t r;
  do {
    r = gen_();
  } while (r > limit);
  return lo + static_cast<long>(r % range);
}

double Rng::unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

namespace {

constexpr std::size_t kMaxNodes = 5'000'000;

// Iterates multi-indices over box [0, n_k) in lexicographic order.
template <typename Fn>
void for_each_node(const std::vector<std::size_t>& n, Fn&& fn) {
  const std::size_t m = n.size();
  for (auto v : n)
    if (v == 0) return;
  std::vector<std::size_t> a(m, 0);
  while (true) {
    fn(a);
    std::size_t k = m;
    while (k > 0) {
      --k;
      if (a[k] + 1 < n[k]) {
        ++a[k];
        break;
      }
      a[k] = 0;
      if (k == 0) return;
    }
    if (m == 0) return;
  }
}

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& n) {
  std::vector<std::size_t> s(n.size(), 1);
  for (std::size_t k = n.size(); k-- > 1;) s[k - 1] = s[k] * n[k];
  return s;
}

}  // namespace

SampledLipschitz::SampledLipschitz(Scalar j, Point lo, Scalar h, std::vector<std::size_t> nodes,
                                   std::vector<Point> values)
    : j_(std::move(j)), lo_(std::move(lo)), h_(std::move(h)), nodes_(std::move(nodes)), values_(std::move(values)) {
  if (h_ <= 0) throw InputError("SampledLipschitz: h must be positive");
  if (nodes_.size() != lo_.size()) throw InputError("SampledLipschitz: node counts differ from dimension");
  std::size_t total = 1;
  for (auto n : nodes_) {
    if (n == 0) throw InputError("SampledLipschitz: empty axis");
    total *= n;
  }
  if (values_.size() != total) throw InputError("SampledLipschitz: value count does not match grid");
  for (const auto& v : values_)
    if (v.size() != values_.front().size()) throw InputError("SampledLipschitz: ragged values");
  lo_d_ = to_double(lo_);
  h_d_ = to_double(h_);
  values_d_.reserve(values_.size());
  for (const auto& v : values_) values_d_.push_back(to_double(v));
}

geometry::Box SampledLipschitz::domain() const {
  Point hi(m());
  for (std::size_t k = 0; k < m(); ++k) hi[k] = lo_[k] + h_ * Scalar(static_cast<long>(nodes_[k] - 1));
  return geometry::Box(lo_, hi);
}

std::size_t SampledLipschitz::node_index(std::span<const std::size_t> a) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < m(); ++k) flat = flat * nodes_[k] + a[k];
  return flat;
}

Point SampledLipschitz::node_position(std::span<const std::size_t> a) const {
  Point p(m());
  for (std::size_t k = 0; k < m(); ++k) p[k] = lo_[k] + h_ * Scalar(static_cast<long>(a[k]));
  return p;
}

Point SampledLipschitz::evaluate(std::span<const Scalar> x) const {
  if (x.size() != m()) throw InputError("SampledLipschitz::evaluate: dimension mismatch");
  const std::size_t mm = m();
  std::vector<std::size_t> base(mm);
  std::vector<Scalar> w(mm);
  std::vector<bool> flat_axis(mm);
  for (std::size_t k = 0; k < mm; ++k) {
    if (nodes_[k] == 1) {
      base[k] = 0;
      flat_axis[k] = true;
      continue;
    }
    Scalar u = (x[k] - lo_[k]) / h_;
    const Scalar top(static_cast<long>(nodes_[k] - 1));
    if (u < 0) u = 0;
    if (u > top) u = top;
    std::size_t i = floor_int(u).get_ui();
    if (i + 1 >= nodes_[k]) i = nodes_[k] - 2;
    base[k] = i;
    w[k] = u - Scalar(static_cast<long>(i));
  }
  Point out(d());
  std::vector<std::size_t> a(mm);
  for (std::size_t corner = 0; corner < (std::size_t{1} << mm); ++corner) {
    Scalar weight = 1;
    bool skip = false;
    for (std::size_t k = 0; k < mm && !skip; ++k) {
      const bool up = (corner >> k) & 1;
      if (flat_axis[k]) {
        if (up) skip = true;
        a[k] = 0;
        continue;
      }
      a[k] = base[k] + (up ? 1 : 0);
      weight *= up ? w[k] : Scalar(1 - w[k]);
      if (weight == 0) skip = true;
    }
    if (skip) continue;
    const Point& v = values_[node_index(a)];
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += weight * v[c];
  }
  return out;
}

std::vector<double> SampledLipschitz::evaluate(std::span<const double> x) const {
  if (x.size() != m()) throw InputError("SampledLipschitz::evaluate: dimension mismatch");
  const std::size_t mm = m();
  std::vector<std::size_t> base(mm);
  std::vector<double> w(mm, 0.0);
  for (std::size_t k = 0; k < mm; ++k) {
    if (nodes_[k] == 1) {
      base[k] = 0;
      continue;
    }
    const double top = static_cast<double>(nodes_[k] - 1);
    double u = std::clamp((x[k] - lo_d_[k]) / h_d_, 0.0, top);
    std::size_t i = static_cast<std::size_t>(std::floor(u));
    if (i + 1 >= nodes_[k]) i = nodes_[k] - 2;
    base[k] = i;
    w[k] = u - static_cast<double>(i);
  }
  std::vector<double> out(d(), 0.0);
  std::vector<std::size_t> a(mm);
  for (std::size_t corner = 0; corner < (std::size_t{1} << mm); ++corner) {
    double weight = 1;
    bool skip = false;
    for (std::size_t k = 0; k < mm && !skip; ++k) {
      const bool up = (corner >> k) & 1;
      if (nodes_[k] == 1) {
        if (up) skip = true;
        a[k] = 0;
        continue;
      }
      a[k] = base[k] + (up ? 1 : 0);
      weight *= up ? w[k] : 1 - w[k];
    }
    if (skip || weight == 0) continue;
    const auto& v = values_d_[node_index(a)];
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += weight * v[c];
  }
  return out;
}

Scalar SampledLipschitz::edge_slope() const {
  const auto strides = strides_of(nodes_);
  Scalar worst = 0;
  for_each_node(nodes_, [&](const std::vector<std::size_t>& a) {
    const std::size_t n = node_index(a);
    for (std::size_t k = 0; k < m(); ++k) {
      if (a[k] + 1 >= nodes_[k]) continue;
      const Point& p = values_[n];
      const Point& q = values_[n + strides[k]];
      for (std::size_t c = 0; c < p.size(); ++c) worst = std::max(worst, Scalar(abs(q[c] - p[c])));
    }
  });
  return worst / h_;
}

Scalar SampledLipschitz::lipschitz_bound() const {
  const std::size_t mm = m();
  const auto strides = strides_of(nodes_);
  std::vector<std::size_t> cells(mm);
  for (std::size_t k = 0; k < mm; ++k) cells[k] = nodes_[k] > 1 ? nodes_[k] - 1 : 1;
  Scalar worst = 0;
  for_each_node(cells, [&](const std::vector<std::size_t>& a) {
    const std::size_t n = node_index(a);
    for (std::size_t c = 0; c < d(); ++c) {
      Scalar sum = 0;
      for (std::size_t k = 0; k < mm; ++k) {
        if (nodes_[k] == 1) continue;
        Scalar axis_max = 0;
        for (std::size_t corner = 0; corner < (std::size_t{1} << mm); ++corner) {
          if ((corner >> k) & 1) continue;
          std::size_t off = 0;
          bool ok = true;
          for (std::size_t q = 0; q < mm; ++q) {
            if ((corner >> q) & 1) {
              if (nodes_[q] == 1) ok = false;
              off += strides[q];
            }
          }
          if (!ok) continue;
          axis_max = std::max(axis_max, Scalar(abs(values_[n + off + strides[k]][c] - values_[n + off][c])));
        }
        sum += axis_max;
      }
      worst = std::max(worst, sum);
    }
  });
  return worst / h_;
}

SampledLipschitz sample_lipschitz(std::size_t m, std::size_t d, const Scalar& j, const geometry::Box& domain,
                                  const Scalar& h, std::uint64_t seed) {
  if (h <= 0) throw InputError("sample_lipschitz: h must be positive");
  if (j < 0) throw InputError("sample_lipschitz: j must be nonnegative");
  if (m < 1 || d < 1 || domain.dim() != m) throw InputError("sample_lipschitz: bad dimensions");
  std::vector<std::size_t> nodes(m);
  std::size_t total = 1;
  for (std::size_t k = 0; k < m; ++k) {
    nodes[k] = ceil_int((domain.hi(k) - domain.lo(k)) / h).get_ui() + 1;
    total *= nodes[k];
    if (total > kMaxNodes) throw ResourceError("sample_lipschitz: grid exceeds node cap");
  }
  const auto strides = strides_of(nodes);
  constexpr long long kSub = 1024;  // value grid: rho / kSub
  const Scalar rho = j * h / Scalar(static_cast<long>(m));
  const Scalar q = rho / Scalar(static_cast<long>(kSub));

  Rng rng(seed);
  std::vector<long long> iv(total * d, 0);
  std::size_t flat = 0;
  for_each_node(nodes, [&](const std::vector<std::size_t>& a) {
    for (std::size_t c = 0; c < d; ++c) {
      long long lo = std::numeric_limits<long long>::min(), hi = std::numeric_limits<long long>::max();
      bool any = false;
      for (std::size_t k = 0; k < m; ++k) {
        if (a[k] == 0) continue;
        const long long v = iv[(flat - strides[k]) * d + c];
        lo = std::max(lo, v - kSub);
        hi = std::min(hi, v + kSub);
        any = true;
      }
      iv[flat * d + c] = (!any || j == 0) ? 0 : rng.uniform(lo, hi);
    }
    ++flat;
  });

  std::vector<Point> values(total, Point(d));
  for (std::size_t n = 0; n < total; ++n)
    for (std::size_t c = 0; c < d; ++c) values[n][c] = q * Scalar(static_cast<long>(iv[n * d + c]));

  SampledLipschitz raw(j, domain.lo(), h, nodes, values);
  Point f0 = raw.evaluate(Point(m));
  for (std::size_t c = 0; c < d; ++c) {
    Scalar target = 0;
    if (j > 0) {
      const long long reach = floor_int(j / q).get_si();
      target = q * Scalar(static_cast<long>(rng.uniform(-reach, reach)));
    }
    const Scalar shift = target - f0[c];
    for (auto& v : values) v[c] += shift;
  }
  return SampledLipschitz(j, domain.lo(), h, std::move(nodes), std::move(values));
}

SampledLipschitz lattice_counterexample(const std::vector<ControlPair>& pairs) {
  if (pairs.empty()) throw InputError("lattice_counterexample: no pairs");
  const std::size_t m = pairs.front().x.size();
  std::map<Point, Scalar> hbar;
  for (const auto& pr : pairs) {
    if (pr.x.size() != m) throw InputError("lattice_counterexample: inconsistent dimension");
    if (pr.y.size() != 1) throw InputError("lattice_counterexample: needs d = 1");
    for (const auto& c : pr.x)
      if (c.get_den() != 1) throw InputError("lattice_counterexample: x must be an integer point");
    if (!hbar.emplace(pr.x, pr.y[0] <= 0 ? Scalar(1) : Scalar(-1)).second)
      throw InputError("lattice_counterexample: duplicate lattice point");
  }
  Point lo(m), hi(m);
  for (std::size_t k = 0; k < m; ++k) {
    lo[k] = hi[k] = pairs.front().x[k];
    for (const auto& pr : pairs) {
      lo[k] = std::min(lo[k], pr.x[k]);
      hi[k] = std::max(hi[k], pr.x[k]);
    }
  }
  const Scalar half(1, 2);
  std::vector<std::size_t> nodes(m);
  for (std::size_t k = 0; k < m; ++k) {
    lo[k] -= half;
    nodes[k] = Scalar((hi[k] - lo[k] + half) * 2).get_num().get_ui() + 1;
  }
  std::size_t total = 1;
  for (auto n : nodes) {
    total *= n;
    if (total > kMaxNodes) throw ResourceError("lattice_counterexample: window too large");
  }
  std::vector<Point> values;
  values.reserve(total);
  for_each_node(nodes, [&](const std::vector<std::size_t>& a) {
    Point pos(m);
    bool lattice = true;
    for (std::size_t k = 0; k < m; ++k) {
      pos[k] = lo[k] + half * Scalar(static_cast<long>(a[k]));
      if (pos[k].get_den() != 1) lattice = false;
    }
    Scalar v = 0;
    if (lattice) {
      auto it = hbar.find(pos);
      if (it != hbar.end()) v = it->second;
    }
    values.push_back(Point{v});
  });
  return SampledLipschitz(Scalar(2), std::move(lo), half, std::move(nodes), std::move(values));
}

namespace {

GameReport summarize(std::vector<GameEntry> entries) {
  GameReport r;
  std::size_t controlled = 0;
  bool infinite = false;
  for (const auto& e : entries) {
    if (e.controlled) ++controlled;
    if (!e.margin) {
      infinite = true;
    } else if (!r.worst_margin || *e.margin > *r.worst_margin) {
      r.worst_margin = *e.margin;
    }
  }
  if (infinite) r.worst_margin.reset();
  r.controlled_fraction = entries.empty() ? 0.0 : static_cast<double>(controlled) / static_cast<double>(entries.size());
  r.entries = std::move(entries);
  return r;
}

Scalar exact_gap(const Point& fx, const Point& y) {
  Scalar g = 0;
  for (std::size_t c = 0; c < y.size(); ++c) g = std::max(g, Scalar(abs(fx[c] - y[c])));
  return g;
}

GameEntry entry_from(std::optional<Scalar> margin, std::size_t label) {
  GameEntry e;
  e.margin = std::move(margin);
  e.controlled = e.margin && *e.margin < 1;
  if (e.controlled) e.controlling_index = label;
  return e;
}

}  // namespace

GameReport game_run(const std::vector<ControlPair>& pairs, const std::vector<SampledLipschitz>& functions) {
  std::vector<std::vector<double>> xd, yd;
  for (const auto& pr : pairs) {
    xd.push_back(to_double(pr.x));
    yd.push_back(to_double(pr.y));
  }
  std::vector<GameEntry> entries;
  entries.reserve(functions.size());
  std::vector<double> md(pairs.size());
  for (const auto& f : functions) {
    if (pairs.empty()) {
      entries.push_back(entry_from(std::nullopt, 0));
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].x.size() != f.m() || pairs[i].y.size() != f.d())
        throw InputError("game_run: pair dimensions differ from the function");
      auto fx = f.evaluate(std::span<const double>(xd[i]));
      double g = 0;
      for (std::size_t c = 0; c < fx.size(); ++c) g = std::max(g, std::fabs(fx[c] - yd[i][c]));
      md[i] = g;
      best = std::min(best, g);
    }
    // exact margins for every pair that could be the minimizer
    const double slack = 1e-9 * (1 + best);
    std::optional<Scalar> margin;
    std::size_t label = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (md[i] > best + slack) continue;
      Scalar g = exact_gap(f.evaluate(std::span<const Scalar>(pairs[i].x)), pairs[i].y);
      if (!margin || g < *margin) {
        margin = g;
        label = pairs[i].index;
      }
    }
    entries.push_back(entry_from(std::move(margin), label));
  }
  return summarize(std::move(entries));
}

GameReport game_run_exact(const std::vector<ControlPair>& pairs, const std::vector<ExactFn>& functions) {
  std::vector<GameEntry> entries;
  for (const auto& f : functions) {
    std::optional<Scalar> margin;
    std::size_t label = 0;
    for (const auto& pr : pairs) {
      Point fx = f(pr.x);
      if (fx.size() != pr.y.size()) throw InputError("game_run_exact: output dimension differs from y");
      Scalar g = exact_gap(fx, pr.y);
      if (!margin || g < *margin) {
        margin = g;
        label = pr.index;
      }
    }
    entries.push_back(entry_from(std::move(margin), label));
  }
  return summarize(std::move(entries));
}

void write_game_report(std::ostream& os, const GameReport& report) {
  os << "#schema=lipctl-game/1 functions=" << report.entries.size()
     << " controlled_fraction=" << report.controlled_fraction
     << " worst_margin=" << (report.worst_margin ? format_scalar(*report.worst_margin) : std::string("inf")) << '\n';
  os << "f,controlled,index,margin\n";
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    os << i << ',' << (e.controlled ? 1 : 0) << ','
       << (e.controlling_index ? std::to_string(*e.controlling_index) : std::string("-")) << ','
       << (e.margin ? format_scalar(*e.margin) : std::string("inf")) << '\n';
  }
}

void write_sampled(std::ostream& os, const SampledLipschitz& f) {
  os << "sampledfn 1 " << f.m() << ' ' << f.d() << '\n';
  os << "j " << format_scalar(f.j()) << '\n';
  os << "h " << format_scalar(f.h()) << '\n';
  os << "lo";
  for (const auto& c : f.lo()) os << ' ' << format_scalar(c);
  os << "\nnodes";
  for (auto n : f.nodes()) os << ' ' << n;
  os << '\n';
  for (const auto& v : f.values()) {
    for (std::size_t c = 0; c < v.size(); ++c) os << (c ? " " : "") << format_scalar(v[c]);
    os << '\n';
  }
}

SampledLipschitz read_sampled(std::istream& is) {
  std::string tag, key, tok;
  int version = 0;
  std::size_t m = 0, d = 0;
  if (!(is >> tag >> version >> m >> d) || tag != "sampledfn" || version != 1 || m == 0 || d == 0)
    throw InputError("bad function header (expected 'sampledfn 1 <m> <d>')");
  auto expect = [&](const char* want) {
    if (!(is >> key) || key != want) throw InputError(std::string("sampled function: expected '") + want + "'");
  };
  auto scalar = [&]() {
    if (!(is >> tok)) throw InputError("sampled function: truncated");
    return parse_scalar(tok);
  };
  expect("j");
  Scalar j = scalar();
  expect("h");
  Scalar h = scalar();
  expect("lo");
  Point lo(m);
  for (auto& c : lo) c = scalar();
  expect("nodes");
  std::vector<std::size_t> nodes(m);
  std::size_t total = 1;
  for (auto& n : nodes) {
    if (!(is >> n) || n == 0) throw InputError("sampled function: bad node count");
    total *= n;
    if (total > kMaxNodes) throw ResourceError("sampled function: grid exceeds node cap");
  }
  std::vector<Point> values(total, Point(d));
  for (auto& v : values)
    for (auto& c : v) c = scalar();
  return SampledLipschitz(std::move(j), std::move(lo), std::move(h), std::move(nodes), std::move(values));
}

fixedpoint::MovingMap moving_map_from(SampledLipschitz f, double l, double t0, double t1) {
  if (f.m() < 1) throw InputError("moving_map_from: empty domain");
  auto fn = std::make_shared<const SampledLipschitz>(std::move(f));
  fixedpoint::MovingMap map;
  map.zdim = fn->m() - 1;
  map.d = fn->d();
  if (fn->m() > map.d) throw InputError("moving_map_from: need m <= d");
  map.l = l;
  map.t0 = t0;
  map.t1 = t1;
  map.z_radius = t0;
  map.lipschitz = to_double(fn->lipschitz_bound());
  map.f = [fn](const fixedpoint::Vec& z, double t) {
    fixedpoint::Vec x(z);
    x.push_back(t);
    return fn->evaluate(std::span<const double>(x));
  };
  const std::size_t m = fn->m();
  map.g = [m, l, t0](const fixedpoint::Vec& y) {
    fixedpoint::Vec z(m - 1);
    const double s = t0 / (2 * l);
    for (std::size_t i = 0; i + 1 < m; ++i) z[i] = s * (y[i] - y[m - 1]);
    return z;
  };
  return map;
}

fixedpoint::MovingMap random_moving_map(std::size_t m, std::size_t d, double l, double t0, double t1,
                                        const Scalar& h, std::uint64_t seed) {
  if (!(t1 > t0) || !(l > 0)) throw InputError("random_moving_map: need t1 > t0 and l > 0");
  Point lo(m), hi(m);
  const Scalar st0(t0), st1(t1);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    lo[k] = -st0;
    hi[k] = st0;
  }
  lo[m - 1] = st0;
  hi[m - 1] = st1;
  SampledLipschitz phi = sample_lipschitz(m, d, Scalar(1), geometry::Box(lo, hi), h, seed);
  double peak = 0;
  for (const auto& v : phi.values())
    for (const auto& c : v) peak = std::max(peak, std::fabs(to_double(c)));
  const double scale = peak > 0 ? (l / 2) / peak : 1.0;

  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  fixedpoint::Vec u(d);
  double un = 0;
  while (un == 0) {
    for (auto& c : u) c = 2 * rng.unit() - 1;
    un = fixedpoint::norm_inf(u);
  }
  for (auto& c : u) c /= un;

  fixedpoint::MovingMap map = moving_map_from(std::move(phi), l, t0, t1);
  auto base = map.f;
  map.f = [base, scale, u, l, t0, t1](const fixedpoint::Vec& z, double t) {
    fixedpoint::Vec y = base(z, t);
    const double s = (t - t0) / (t1 - t0) * 2 * l;
    for (std::size_t c = 0; c < y.size(); ++c) y[c] = scale * y[c] + s * u[c];
    return y;
  };
  map.lipschitz = scale * map.lipschitz + 2 * l / (t1 - t0);
  return map;
}

}  // namespace lipctl::harness
