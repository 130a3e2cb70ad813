// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance                 all criteria
//   acceptance --criterion N   one criterion (N in 1..8, or 6s)

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "lipctl/controller1d.hpp"
#include "lipctl/controllermd.hpp"
#include "lipctl/errors.hpp"
#include "lipctl/feasibility.hpp"
#include "lipctl/fixedpoint.hpp"
#include "lipctl/harness.hpp"
#include "lipctl/sequences.hpp"
#include "oracles.hpp"

using namespace lipctl;
using feasibility::ControlPair;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- criteria 1 and 2

struct TraceRun {
  std::size_t d = 0, pairs = 0;
  bool bound_ok = false;
  Scalar min_margin;
  bool evader_ok = false;
  std::string evader_note;
};

std::vector<TraceRun>& trace_runs() {
  static std::vector<TraceRun> runs = [] {
    std::vector<TraceRun> out;
    harness::Rng rng(1001);
    for (int inst = 0; inst < 50; ++inst) {
      const std::size_t d = 1 + static_cast<std::size_t>(inst % 3);
      const long cap = d == 1 ? 100 : (d == 2 ? 60 : 30);
      const auto n = static_cast<std::size_t>(rng.uniform(5, cap));
      std::vector<ControlPair> pairs;
      Scalar t = 0;
      for (std::size_t i = 0; i < n; ++i) {
        t += ratio(rng.uniform(1, 8), 8);
        const long span = 8 * (floor_int(3 * t).get_si() + 2);
        Point y(d);
        for (auto& c : y) c = ratio(rng.uniform(-span, span), 8);
        pairs.push_back({i, Point{t}, std::move(y)});
      }
      TraceRun r;
      r.d = d;
      r.pairs = n;
      auto params = feasibility::compute_params(pairs, d);
      auto tr = feasibility::evader_trace(pairs, d, params);
      auto rep = feasibility::check_measure_bound(tr);
      r.bound_ok = rep.ok;
      r.min_margin = rep.steps.front().margin;
      for (const auto& s : rep.steps) r.min_margin = std::min(r.min_margin, s.margin);
      try {
        auto g = feasibility::reconstruct_evader(tr);
        bool ok = g.max_slope() <= params.beta;
        for (const auto& p : tr.pairs) ok = ok && dist_inf(g.evaluate_radial(p.x), p.y) >= 1;
        r.evader_ok = ok;
      } catch (const Error& e) {
        r.evader_note = e.what();
      }
      out.push_back(std::move(r));
    }
    return out;
  }();
  return runs;
}

Outcome criterion1() {
  std::size_t ok = 0, total_pairs = 0;
  std::optional<Scalar> worst;
  for (const auto& r : trace_runs()) {
    ok += r.bound_ok;
    total_pairs += r.pairs;
    if (!worst || r.min_margin < *worst) worst = r.min_margin;
  }
  std::ostringstream os;
  os << ok << "/50 traces satisfy the measure bound exactly (" << total_pairs
     << " pairs, d in {1,2,3}); smallest margin " << format_scalar(*worst);
  return {ok == 50, os.str()};
}

Outcome criterion2() {
  std::size_t ok = 0;
  std::string note;
  for (const auto& r : trace_runs()) {
    ok += r.evader_ok;
    if (!r.evader_ok && note.empty()) note = r.evader_note;
  }
  std::ostringstream os;
  os << ok << "/50 reconstructed evaders have slope <= beta' and miss every pair by >= 1";
  if (!note.empty()) os << "; first problem: " << note;
  return {ok == 50, os.str()};
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion3() {
  struct Case {
    unsigned long j, n;
    std::size_t d;
  };
  bool all = true;
  std::ostringstream os;
  for (const Case c : {Case{1, 1, 1}, Case{1, 2, 1}, Case{2, 1, 1}, Case{1, 1, 2}}) {
    const std::size_t k = controller1d::block_size(c.j, c.n, c.d).get_ui();
    std::vector<Scalar> xs;
    for (std::size_t i = 0; i < k; ++i)
      xs.push_back(Scalar(static_cast<long>(i * c.n)) / Scalar(static_cast<long>(k - 1)));
    auto pairs = controller1d::build_block(c.j, c.n, c.d, xs);
    const Scalar j(static_cast<long>(c.j)), n(static_cast<long>(c.n));
    const bool controlled = feasibility::feasible_control_check(pairs, j, c.d, n).controlled;
    Integer unit = 1;
    for (const auto& q : pairs) {
      unit = lcm(unit, q.x[0].get_den());
      for (const auto& v : q.y) unit = lcm(unit, v.get_den());
    }
    std::size_t witnesses = 0;
    std::vector<std::size_t> redundant;
    bool oracle_agrees = oracle::grid_controlled(pairs, static_cast<long>(c.j), c.d, unit.get_si());
    for (std::size_t drop = 0; drop < pairs.size(); ++drop) {
      auto fewer = pairs;
      fewer.erase(fewer.begin() + static_cast<long>(drop));
      auto v = feasibility::feasible_control_check(fewer, j, c.d, n);
      oracle_agrees = oracle_agrees &&
                      v.controlled == oracle::grid_controlled(fewer, static_cast<long>(c.j), c.d, unit.get_si());
      if (!v.witness) {
        redundant.push_back(drop);
        continue;
      }
      bool ok = v.witness->max_slope() <= j && norm_inf(v.witness->evaluate(Scalar(0))) <= j;
      for (const auto& q : fewer) ok = ok && dist_inf(v.witness->evaluate(q.x[0]), q.y) >= 1;
      witnesses += ok;
    }
    all = all && controlled && witnesses == pairs.size();
    os << " (j,n,d)=(" << c.j << ',' << c.n << ',' << c.d << "): k=" << k << (controlled ? " controlled" : " NOT controlled")
       << ", " << witnesses << '/' << pairs.size() << " deletion witnesses";
    if (!redundant.empty()) {
      os << " (without pair";
      for (auto r : redundant) os << ' ' << r;
      os << " still controlled)";
    }
    os << (oracle_agrees ? ", grid oracle agrees;" : ", grid oracle DISAGREES;");
    all = all && oracle_agrees;
  }
  return {all, "blocks" + os.str()};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion4() {
  harness::Rng rng(4004);
  std::size_t agree = 0, controlled = 0;
  for (int t = 0; t < 200; ++t) {
    const long j = rng.uniform(1, 2);
    const long n = rng.uniform(1, 2);
    const auto count = static_cast<std::size_t>(rng.uniform(1, 4));
    std::vector<ControlPair> pairs;
    for (std::size_t i = 0; i < count; ++i) {
      const long x4 = rng.uniform(0, t % 2 ? 1 : 4 * n), yr = j * (4 + x4);
      pairs.push_back({i, Point{ratio(x4, 4)}, Point{ratio(rng.uniform(-yr, yr), 4)}});
    }
    const bool exact = feasibility::feasible_control_check(pairs, Scalar(j), 1, Scalar(n)).controlled;
    const bool brute = oracle::brute_force_controlled(pairs, j);
    agree += exact == brute;
    controlled += exact;
  }
  std::ostringstream os;
  os << agree << "/200 instances agree with exhaustive quarter-grid search (" << controlled << " controlled)";
  return {agree == 200, os.str()};
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion5() {
  harness::Rng rng(5005);
  std::size_t evaded = 0;
  Scalar worst_slope = 0;
  std::optional<Scalar> smallest;
  for (int t = 0; t < 100; ++t) {
    std::vector<ControlPair> pairs;
    for (long a = -5; a <= 5; ++a)
      for (long b = -5; b <= 5; ++b)
        pairs.push_back({pairs.size(), Point{Scalar(a), Scalar(b)}, Point{ratio(rng.uniform(-48, 48), 8)}});
    auto f = harness::lattice_counterexample(pairs);
    worst_slope = std::max(worst_slope, f.edge_slope());
    Scalar margin = dist_inf(f.evaluate(pairs.front().x), pairs.front().y);
    for (const auto& p : pairs) margin = std::min(margin, dist_inf(f.evaluate(p.x), p.y));
    if (!smallest || margin < *smallest) smallest = margin;
    evaded += f.edge_slope() <= 2 && margin >= 1;
  }
  std::ostringstream os;
  os << evaded << "/100 assignments on [-5,5]^2 evaded; largest edge slope " << format_scalar(worst_slope)
     << ", smallest margin " << format_scalar(*smallest);
  return {evaded == 100, os.str()};
}

// ---------------------------------------------------------------- criterion 6

sequences::PointSeq square_grid(const Scalar& step, const Scalar& R) {
  sequences::PointSeq s;
  s.m = 2;
  const long n = Scalar(R / step).get_num().get_si();
  s.points.reserve(static_cast<std::size_t>((2 * n + 1) * (2 * n + 1)));
  for (long a = -n; a <= n; ++a)
    for (long b = -n; b <= n; ++b) s.push({step * Scalar(a), step * Scalar(b)});
  return s;
}

Outcome play_md(const sequences::PointSeq& s, const std::string& label) {
  controllermd::MdParams p;
  try {
    p = controllermd::derive_params(s, 1, 2);
  } catch (const NotDenseEnoughError& e) {
    return {false, label + ": " + e.what()};
  }
  auto a = controllermd::build_md(s, p);
  std::size_t max_half = 0;
  std::set<std::size_t> used;
  bool unique = true;
  for (const auto& z : a.balls) max_half = std::max(max_half, z.half_centers.size());
  for (const auto& pr : a.pairs) unique = unique && used.insert(pr.index).second;
  const bool counts_ok = Integer(static_cast<unsigned long>(max_half)) <= p.half_quota();

  const Scalar R = p.t1 + ratio(1, 4);
  const geometry::Box domain({-R, -R}, {R, R});
  std::vector<harness::SampledLipschitz> fs;
  fs.reserve(1000);
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    fs.push_back(harness::sample_lipschitz(2, 2, Scalar(1), domain, ratio(1, 4), 60000 + seed));
  auto rep = harness::game_run(a.pairs, fs);
  std::size_t controlled = 0;
  for (const auto& e : rep.entries) controlled += e.controlled;

  std::ostringstream os;
  os << label << ": t0=" << format_scalar(p.t0) << " t1=" << format_scalar(p.t1) << " l=" << p.l << ", "
     << a.balls.size() << " eps-balls, " << a.pairs.size() << " pairs, max 1/2-balls per ball " << max_half
     << " (bound " << p.half_quota().get_str() << ")" << (unique ? "" : ", DUPLICATE index") << "; " << controlled
     << "/1000 sampled functions controlled, worst margin "
     << (rep.worst_margin ? std::to_string(to_double(*rep.worst_margin)) : std::string("inf"));
  return {counts_ok && unique && controlled == 1000, os.str()};
}

Outcome criterion6() { return play_md(square_grid(ratio(1, 64), Scalar(4)), "1/64 grid, radius 4"); }

Outcome criterion6_fine() {
  return play_md(square_grid(ratio(1, 128), ratio(11, 4)), "1/128 grid, radius 11/4 (supplementary)");
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7() {
  std::size_t found = 0;
  double worst = 0;
  std::string note;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto map = harness::random_moving_map(2, 2, 4, 2.25, 3, ratio(1, 4), 7000 + seed);
    fixedpoint::SearchOptions o;
    o.tol = 1e-2;
    try {
      auto c = fixedpoint::find_crossing(map, o);
      auto y = map.f(c.z, c.t);
      const double sphere = std::fabs(fixedpoint::norm_inf(y) - map.l);
      const double section = std::fabs(map.g(y)[0] - c.z[0]);
      worst = std::max({worst, sphere, section});
      found += sphere <= 1e-2 && section <= 1e-2 && c.t > map.t0 && c.t < map.t1;
    } catch (const Error& e) {
      if (note.empty()) note = e.what();
    }
  }
  std::ostringstream os;
  os << found << "/50 moving maps yield a crossing within 1e-2; worst re-evaluated residual " << worst;
  if (!note.empty()) os << "; first failure: " << note;
  return {found == 50, os.str()};
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion8() {
  std::ostringstream os;
  bool lattice_ok = true;
  for (std::size_t m = 1; m <= 3; ++m) {
    auto s = sequences::gen_lattice(m, 8);
    auto rep = sequences::counting_function(s, 2, 8);
    for (std::size_t n = 1; n <= 8; ++n) {
      std::size_t expect = 1;
      for (std::size_t k = 0; k < m; ++k) expect *= 2 * n + 1;
      lattice_ok = lattice_ok && rep.counts[n - 1] == expect;
    }
  }
  os << "lattice counts " << (lattice_ok ? "match" : "DIFFER") << ";";

  bool pow_ok = true;
  for (std::size_t d = 1; d <= 2; ++d) {
    auto s = sequences::gen_pow2(d, 6);
    auto rep = sequences::counting_function(s, d, 64);
    const Scalar& r = rep.ratios[63];
    pow_ok = pow_ok && r >= 3 && rep.sup_ratio() >= 3;
    os << " pow2 d=" << d << " ratio(64)=" << format_scalar(r) << ";";
  }

  auto growth = [](const Scalar& x) {
    Integer f = floor_int(x);
    return Scalar(f * f * f);
  };
  bool sparse_ok = true;
  for (auto [m, d] : {std::pair<std::size_t, std::size_t>{1, 2}, {2, 2}}) {
    auto a = sequences::gen_sparse_levels(m, d, growth, 2);
    harness::Rng rng(8000 + m);
    std::size_t pass = 0;
    for (int t = 0; t < 100; ++t) {
      const std::size_t i = 1 + static_cast<std::size_t>(t % 2);
      const Scalar lo = a.thresholds[i - 1] + 1, hi = a.thresholds[i] - 1;
      const long L = Scalar(lo * 64).get_num().get_si(), H = Scalar(hi * 64).get_num().get_si();
      const Scalar r = ratio(rng.uniform(L, H), 64);
      Point x(m);
      const long rn = Scalar(r * 64).get_num().get_si();
      for (auto& c : x) c = ratio(rng.uniform(-rn, rn), 64);
      x[static_cast<std::size_t>(rng.uniform(0, static_cast<long>(m) - 1))] = rng.uniform(0, 1) ? r : -r;
      const Scalar nx = norm_inf(x);
      const unsigned ex = static_cast<unsigned>(d - m);
      const Scalar reach = Scalar(2) / pow_int(Scalar(2), static_cast<unsigned>(i));
      const bool lower = Scalar(static_cast<long>(sequences::local_count(a.seq, x, reach))) >=
                         pow_int(Scalar(floor_int(nx)), ex);
      const bool upper =
          Scalar(static_cast<long>(sequences::local_count(a.seq, x, Scalar(1)))) <= growth(nx) * pow_int(nx, ex);
      pass += lower && upper;
    }
    sparse_ok = sparse_ok && pass == 100;
    os << " sparse levels (m=" << m << ",d=" << d << ", " << a.seq.size() << " points): " << pass << "/100 locations;";
  }
  return {lattice_ok && pow_ok && sparse_ok, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<Outcome()>> table{
      {"1", criterion1}, {"2", criterion2}, {"3", criterion3}, {"4", criterion4},  {"5", criterion5},
      {"6", criterion6}, {"6s", criterion6_fine}, {"7", criterion7}, {"8", criterion8}};
  std::vector<std::string> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which.push_back(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (which.empty()) which = {"1", "2", "3", "4", "5", "6", "6s", "7", "8"};
  bool all = true;
  for (const auto& key : which) {
    auto it = table.find(key);
    if (it == table.end()) {
      std::cerr << "unknown criterion " << key << '\n';
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << key << ": " << o.detail << " [" << secs << " s]"
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
