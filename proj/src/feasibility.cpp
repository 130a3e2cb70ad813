#include "lipctl/feasibility.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "lipctl/errors.hpp"

namespace lipctl::feasibility {

using geometry::Region;

std::vector<ControlPair> sort_by_radius(std::vector<ControlPair> pairs) {
  std::vector<std::pair<Scalar, std::size_t>> keyed;
  keyed.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) keyed.emplace_back(norm_inf(pairs[i].x), i);
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ControlPair> out;
  out.reserve(pairs.size());
  for (auto& [r, i] : keyed) out.push_back(std::move(pairs[i]));
  return out;
}

namespace {

void check_sorted(const std::vector<ControlPair>& pairs) {
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (norm_inf(pairs[i].x) < norm_inf(pairs[i - 1].x)) {
      throw InputError("pairs must be sorted by |x| (entry " + std::to_string(i) + " is out of order)");
    }
  }
}

// Walks back from the last region, choosing each value inside the previous
// region and within rate * dt of the value after it.
RadialPLFunction backtrack(const std::vector<Scalar>& times, const std::vector<Region>& regions, const Scalar& rate) {
  const std::size_t n = regions.size();
  std::vector<Point> values(n);
  auto last = geometry::pick_point(regions[n - 1]);
  if (!last) throw InternalError("backtrack: final feasible set is empty");
  values[n - 1] = std::move(*last);
  for (std::size_t i = n - 1; i-- > 0;) {
    Scalar r = rate * (times[i + 1] - times[i]);
    auto p = geometry::pick_point(geometry::intersect_cube(regions[i], values[i + 1], r));
    if (!p) throw InternalError("backtrack: empty intersection at step " + std::to_string(i));
    values[i] = std::move(*p);
  }
  std::vector<Scalar> bp;
  std::vector<Point> vals;
  for (std::size_t i = 0; i < n; ++i) {
    if (!bp.empty() && bp.back() == times[i]) {
      if (vals.back() != values[i]) throw InternalError("backtrack: two values at one breakpoint");
      continue;
    }
    bp.push_back(times[i]);
    vals.push_back(std::move(values[i]));
  }
  return RadialPLFunction(std::move(bp), std::move(vals), rate);
}

}  // namespace

EvaderParams compute_params(const std::vector<ControlPair>& pairs, std::size_t d) {
  if (d < 1) throw InputError("compute_params: d must be >= 1");
  check_sorted(pairs);
  EvaderParams p;
  p.d = d;
  std::size_t i = 0;
  bool any = false;
  for (const auto& pr : pairs) {
    Scalar t = norm_inf(pr.x);
    if (t == 0) {
      ++p.k0;
      continue;
    }
    ++i;
    Scalar ratio = Scalar(static_cast<unsigned long>(i)) / pow_int(t, static_cast<unsigned>(d));
    if (!any || ratio > p.alpha) p.alpha = ratio;
    any = true;
  }
  if (!any) throw InputError("compute_params: every pair has |x| = 0");
  // 2 alpha^(1/d) = (2^d alpha)^(1/d)
  p.beta = dyadic_root_upper(p.alpha * pow_int(Scalar(2), static_cast<unsigned>(d)), static_cast<unsigned>(d),
                             kBetaBits);
  return p;
}

Point start_point(const std::vector<ControlPair>& zero_pairs, std::size_t d) {
  Point y(d, Scalar(0));
  if (zero_pairs.empty()) return y;
  Scalar top = zero_pairs.front().y.at(0);
  for (const auto& pr : zero_pairs) {
    if (pr.y.size() != d) throw InputError("start_point: y dimension mismatch");
    top = std::max(top, pr.y[0]);
  }
  y[0] = top + 2;
  return y;
}

// ---------------------------------------------------------------- RadialPLFunction

RadialPLFunction::RadialPLFunction(std::vector<Scalar> breakpoints, std::vector<Point> values, Scalar lipschitz)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), lipschitz_(std::move(lipschitz)) {
  if (breakpoints_.empty() || breakpoints_.size() != values_.size()) {
    throw InputError("RadialPLFunction: need one value per breakpoint");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i - 1] < breakpoints_[i])) throw InputError("RadialPLFunction: breakpoints not increasing");
    if (values_[i].size() != values_[0].size()) throw InputError("RadialPLFunction: value dimension mismatch");
  }
}

Point RadialPLFunction::evaluate(const Scalar& t) const {
  if (t <= breakpoints_.front()) return values_.front();
  if (t >= breakpoints_.back()) return values_.back();
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - breakpoints_.begin());
  std::size_t lo = hi - 1;
  Scalar w = (t - breakpoints_[lo]) / (breakpoints_[hi] - breakpoints_[lo]);
  Point out(values_[lo].size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = values_[lo][k] + w * (values_[hi][k] - values_[lo][k]);
  return out;
}

Scalar RadialPLFunction::max_slope() const {
  Scalar best = 0;
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    Scalar dt = breakpoints_[i] - breakpoints_[i - 1];
    for (std::size_t k = 0; k < values_[i].size(); ++k) {
      Scalar s = abs(values_[i][k] - values_[i - 1][k]) / dt;
      if (s > best) best = s;
    }
  }
  return best;
}

// ---------------------------------------------------------------- evader

FeasTrace evader_trace(const std::vector<ControlPair>& pairs, std::size_t d, const EvaderParams& params,
                       const geometry::Limits& limits) {
  check_sorted(pairs);
  FeasTrace tr;
  tr.params = params;
  std::vector<ControlPair> zero;
  for (const auto& pr : pairs) {
    if (pr.y.size() != d) throw InputError("evader_trace: y dimension differs from d");
    if (norm_inf(pr.x) == 0) {
      zero.push_back(pr);
    } else {
      tr.pairs.push_back(pr);
    }
  }
  Point start = start_point(zero, d);
  tr.radii.push_back(0);
  tr.regions.push_back(Region::point(start));
  tr.measures.push_back(0);

  for (const auto& pr : tr.pairs) {
    Scalar t = norm_inf(pr.x);
    Scalar r = params.beta * (t - tr.radii.back());
    Region grown = geometry::minkowski_expand(tr.regions.back(), r, limits);
    Region next = geometry::subtract_cube(grown, pr.y, Scalar(1), true, limits);
    tr.measures.push_back(geometry::measure(next));
    tr.radii.push_back(std::move(t));
    tr.regions.push_back(std::move(next));
  }
  return tr;
}

MeasureBoundReport check_measure_bound(const FeasTrace& trace) {
  MeasureBoundReport rep;
  const unsigned d = static_cast<unsigned>(trace.params.d);
  const Scalar two_d = pow_int(Scalar(2), d);
  for (std::size_t i = 0; i < trace.regions.size(); ++i) {
    MeasureBoundStep step;
    step.i = i;
    step.t = trace.radii[i];
    step.boxes = trace.regions[i].size();
    step.measure = trace.measures[i];
    step.bound = 2 * two_d * trace.params.alpha * pow_int(step.t, d) - two_d * Scalar(static_cast<unsigned long>(i));
    step.margin = step.measure - step.bound;
    if (step.margin < 0 && rep.ok) {
      rep.ok = false;
      rep.first_violation = i;
    }
    rep.steps.push_back(std::move(step));
  }
  return rep;
}

RadialPLFunction reconstruct_evader(const FeasTrace& trace) {
  for (std::size_t i = 0; i < trace.regions.size(); ++i) {
    if (trace.regions[i].empty()) throw InternalError("reconstruct_evader: D_" + std::to_string(i) + " is empty");
  }
  return backtrack(trace.radii, trace.regions, trace.params.beta);
}

void write_trace_csv(std::ostream& os, const FeasTrace& trace, const MeasureBoundReport& report) {
  os << "#schema=lipctl-trace/1 d=" << trace.params.d << " alpha=" << format_scalar(trace.params.alpha)
     << " beta=" << format_scalar(trace.params.beta) << '\n';
  os << "i,t,boxes,measure,bound,margin\n";
  for (const auto& s : report.steps) {
    os << s.i << ',' << format_scalar(s.t) << ',' << s.boxes << ',' << format_scalar(s.measure) << ','
       << format_scalar(s.bound) << ',' << format_scalar(s.margin) << '\n';
  }
}

// ---------------------------------------------------------------- control oracle

ControlVerdict feasible_control_check(const std::vector<ControlPair>& pairs, const Scalar& j, std::size_t d,
                                      const Scalar& n, const geometry::Limits& limits) {
  if (j < 0) throw InputError("feasible_control_check: j must be nonnegative");
  std::vector<ControlPair> sorted;
  sorted.reserve(pairs.size());
  for (const auto& pr : pairs) {
    if (pr.x.size() != 1) throw InputError("feasible_control_check: needs one-dimensional x");
    if (pr.y.size() != d) throw InputError("feasible_control_check: y dimension differs from d");
    if (pr.x[0] < 0 || pr.x[0] > n) throw InputError("feasible_control_check: x outside [0, n]");
    sorted.push_back(pr);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.x[0] < b.x[0]; });

  std::vector<Scalar> times{Scalar(0)};
  std::vector<Region> regions{Region::single(geometry::Box::cube(Point(d, Scalar(0)), j))};
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Scalar& x = sorted[i].x[0];
    Region grown = geometry::minkowski_expand(regions.back(), j * (x - times.back()), limits);
    Region next = geometry::subtract_cube(grown, sorted[i].y, Scalar(1), true, limits);
    times.push_back(x);
    regions.push_back(std::move(next));
    if (regions.back().empty()) {
      ControlVerdict v;
      v.controlled = true;
      v.emptied_at = i;
      return v;
    }
  }
  ControlVerdict v;
  v.witness = backtrack(times, regions, j);
  return v;
}

// ---------------------------------------------------------------- text formats

void write_pairs(std::ostream& os, const std::vector<ControlPair>& pairs, std::size_t m, std::size_t d) {
  os << "pairs 1 " << m << ' ' << d << ' ' << pairs.size() << '\n';
  for (const auto& pr : pairs) {
    os << pr.index;
    for (const auto& c : pr.x) os << ' ' << format_scalar(c);
    for (const auto& c : pr.y) os << ' ' << format_scalar(c);
    os << '\n';
  }
}

std::vector<ControlPair> read_pairs(std::istream& is, std::size_t* m_out, std::size_t* d_out) {
  std::string tag;
  int version = 0;
  std::size_t m = 0, d = 0, count = 0;
  if (!(is >> tag >> version >> m >> d >> count) || tag != "pairs" || version != 1 || m == 0 || d == 0) {
    throw InputError("bad pair-list header (expected 'pairs 1 <m> <d> <count>')");
  }
  std::vector<ControlPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ControlPair pr;
    if (!(is >> pr.index)) throw InputError("truncated pair list at record " + std::to_string(i));
    pr.x.resize(m);
    pr.y.resize(d);
    for (auto* vec : {&pr.x, &pr.y}) {
      for (auto& c : *vec) {
        std::string tok;
        if (!(is >> tok)) throw InputError("truncated pair list at record " + std::to_string(i));
        c = parse_scalar(tok);
      }
    }
    out.push_back(std::move(pr));
  }
  if (m_out) *m_out = m;
  if (d_out) *d_out = d;
  return out;
}

void write_function(std::ostream& os, const RadialPLFunction& g) {
  os << "plfunction 1 " << g.dim() << ' ' << g.breakpoints().size() << '\n';
  os << "lipschitz " << format_scalar(g.lipschitz()) << '\n';
  for (std::size_t i = 0; i < g.breakpoints().size(); ++i) {
    os << format_scalar(g.breakpoints()[i]);
    for (const auto& c : g.values()[i]) os << ' ' << format_scalar(c);
    os << '\n';
  }
}

}  // namespace lipctl::feasibility
