#include <doctest.h>

#include <sstream>

#include "lipctl/errors.hpp"
#include "lipctl/feasibility.hpp"
#include "lipctl/harness.hpp"

using namespace lipctl;
using namespace lipctl::harness;

namespace {

ControlPair pr(std::size_t i, Point x, Point y) { return ControlPair{i, std::move(x), std::move(y)}; }

// Independent audit: every grid edge, every output coordinate.
Scalar audit_edges(const SampledLipschitz& f) {
  Scalar worst = 0;
  const auto& nodes = f.nodes();
  std::vector<std::size_t> a(f.m(), 0);
  while (true) {
    for (std::size_t k = 0; k < f.m(); ++k) {
      if (a[k] + 1 >= nodes[k]) continue;
      auto b = a;
      ++b[k];
      const auto& u = f.values()[f.node_index(a)];
      const auto& v = f.values()[f.node_index(b)];
      for (std::size_t c = 0; c < f.d(); ++c) worst = std::max(worst, Scalar(abs(u[c] - v[c]) / f.h()));
    }
    std::size_t k = f.m();
    bool done = false;
    while (k > 0) {
      --k;
      if (a[k] + 1 < nodes[k]) {
        ++a[k];
        break;
      }
      a[k] = 0;
      if (k == 0) done = true;
    }
    if (done) return worst;
  }
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("rng is deterministic and in range") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) {
      long long x = a.uniform(-3, 9);
      CHECK(x == b.uniform(-3, 9));
      CHECK(x >= -3);
      CHECK(x <= 9);
    }
    CHECK(Rng(1).uniform(0, 1000000) != Rng(2).uniform(0, 1000000));
  }

  TEST_CASE("j = 0 gives a constant") {
    auto f = sample_lipschitz(2, 2, Scalar(0), geometry::Box({Scalar(-1), Scalar(-1)}, {Scalar(1), Scalar(1)}),
                              ratio(1, 4), 9);
    for (const auto& v : f.values()) CHECK(v == f.values().front());
    CHECK(f.values().front() == Point{Scalar(0), Scalar(0)});
  }

  TEST_CASE("samples are j-Lipschitz and start inside cube(0, j)") {
    std::uint64_t seed = 100;
    for (std::size_t m = 1; m <= 3; ++m) {
      for (std::size_t d = 1; d <= 2; ++d) {
        for (long jn : {1, 3}) {
          const Scalar j = ratio(jn, 2);
          Point lo(m, Scalar(-1)), hi(m, Scalar(1));
          auto f = sample_lipschitz(m, d, j, geometry::Box(lo, hi), ratio(1, 4), seed++);
          CHECK(audit_edges(f) == f.edge_slope());
          CHECK(f.edge_slope() <= j);
          CHECK(f.lipschitz_bound() <= j);
          CHECK(norm_inf(f.evaluate(Point(m, Scalar(0)))) <= j);
          // the interpolant's slope between random points respects the bound
          Rng rng(seed);
          for (int t = 0; t < 30; ++t) {
            Point x(m), y(m);
            for (std::size_t k = 0; k < m; ++k) {
              x[k] = ratio(rng.uniform(-64, 64), 64);
              y[k] = ratio(rng.uniform(-64, 64), 64);
            }
            if (x == y) continue;
            CHECK(dist_inf(f.evaluate(x), f.evaluate(y)) <= j * dist_inf(x, y));
          }
        }
      }
    }
  }

  TEST_CASE("exact and double evaluation agree") {
    auto f = sample_lipschitz(2, 1, Scalar(1), geometry::Box({Scalar(0), Scalar(0)}, {Scalar(2), Scalar(2)}),
                              ratio(1, 8), 3);
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
      Point x{ratio(rng.uniform(-10, 300), 128), ratio(rng.uniform(0, 256), 128)};
      auto e = f.evaluate(x);
      auto dv = f.evaluate(std::vector<double>{to_double(x[0]), to_double(x[1])});
      CHECK(dv[0] == doctest::Approx(to_double(e[0])).epsilon(1e-12));
    }
  }

  TEST_CASE("seed 42 regression table") {
    auto f = sample_lipschitz(1, 1, Scalar(1), geometry::Box({Scalar(0)}, {Scalar(1)}), ratio(1, 4), 42);
    std::ostringstream os;
    for (const auto& v : f.values()) os << format_scalar(v[0]) << ' ';
    CHECK(os.str() == "-973/2048 -999/4096 -677/4096 217/4096 -81/1024 ");
  }

  TEST_CASE("sampled function text round trip") {
    auto f = sample_lipschitz(2, 2, Scalar(1), geometry::Box({Scalar(0), Scalar(0)}, {Scalar(1), Scalar(1)}),
                              ratio(1, 2), 11);
    std::stringstream ss;
    write_sampled(ss, f);
    auto g = read_sampled(ss);
    CHECK(g.values() == f.values());
    CHECK(g.nodes() == f.nodes());
    CHECK(g.h() == f.h());
    CHECK(g.lo() == f.lo());
  }

  TEST_CASE("lattice counterexample examples") {
    std::vector<ControlPair> zeros{pr(0, {Scalar(0)}, {Scalar(0)}), pr(1, {Scalar(3)}, {Scalar(0)})};
    auto f = lattice_counterexample(zeros);
    CHECK(f.evaluate(Point{Scalar(0)}) == Point{Scalar(1)});
    CHECK(f.evaluate(Point{Scalar(3)}) == Point{Scalar(1)});
    CHECK(f.evaluate(Point{ratio(1, 2)}) == Point{Scalar(0)});
    auto five = lattice_counterexample({pr(0, {Scalar(1), Scalar(2)}, {Scalar(5)})});
    CHECK(five.evaluate(Point{Scalar(1), Scalar(2)}) == Point{Scalar(-1)});
    CHECK_THROWS_AS(lattice_counterexample({pr(0, {ratio(1, 2)}, {Scalar(0)})}), InputError);
  }

  TEST_CASE("lattice counterexample evades random assignments") {
    Rng rng(2024);
    for (int t = 0; t < 20; ++t) {
      std::vector<ControlPair> pairs;
      for (long a = -3; a <= 3; ++a)
        for (long b = -3; b <= 3; ++b) pairs.push_back(pr(pairs.size(), {Scalar(a), Scalar(b)}, {ratio(rng.uniform(-40, 40), 8)}));
      auto f = lattice_counterexample(pairs);
      CHECK(audit_edges(f) <= 2);
      auto rep = game_run(pairs, {f});
      CHECK_FALSE(rep.entries[0].controlled);
      REQUIRE(rep.entries[0].margin);
      CHECK(*rep.entries[0].margin >= 1);
    }
  }

  TEST_CASE("game margins match direct evaluation") {
    Rng rng(77);
    std::vector<ControlPair> pairs;
    for (std::size_t i = 0; i < 30; ++i)
      pairs.push_back(pr(i, {ratio(rng.uniform(0, 64), 32), ratio(rng.uniform(0, 64), 32)},
                         {ratio(rng.uniform(-16, 16), 8)}));
    std::vector<SampledLipschitz> fs;
    for (std::uint64_t s = 0; s < 20; ++s)
      fs.push_back(sample_lipschitz(2, 1, Scalar(1), geometry::Box({Scalar(0), Scalar(0)}, {Scalar(2), Scalar(2)}),
                                    ratio(1, 4), s));
    auto rep = game_run(pairs, fs);
    std::size_t controlled = 0;
    std::optional<Scalar> worst;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      std::optional<Scalar> direct;
      for (const auto& p : pairs) {
        Scalar g = dist_inf(fs[k].evaluate(p.x), p.y);
        if (!direct || g < *direct) direct = g;
      }
      REQUIRE(rep.entries[k].margin);
      CHECK(*rep.entries[k].margin == *direct);
      CHECK(rep.entries[k].controlled == (*direct < 1));
      controlled += rep.entries[k].controlled;
      if (!worst || *direct > *worst) worst = *direct;
    }
    CHECK(rep.controlled_fraction == doctest::Approx(static_cast<double>(controlled) / fs.size()));
    CHECK(rep.worst_margin == worst);

    std::ostringstream os;
    write_game_report(os, rep);
    CHECK(os.str().rfind("#schema=lipctl-game/1", 0) == 0);
  }

  TEST_CASE("empty pair list and margin exactly one") {
    auto f = sample_lipschitz(1, 1, Scalar(1), geometry::Box({Scalar(0)}, {Scalar(1)}), ratio(1, 2), 1);
    auto rep = game_run({}, {f});
    CHECK_FALSE(rep.entries[0].controlled);
    CHECK_FALSE(rep.entries[0].margin);
    CHECK_FALSE(rep.worst_margin);
    CHECK(rep.controlled_fraction == 0.0);

    ExactFn zero = [](std::span<const Scalar>) { return Point{Scalar(0)}; };
    auto edge = game_run_exact({pr(0, {Scalar(0)}, {Scalar(1)})}, {zero});
    CHECK_FALSE(edge.entries[0].controlled);
    CHECK(*edge.entries[0].margin == 1);
  }

  TEST_CASE("feasibility evader loses the game") {
    std::vector<ControlPair> pairs{pr(1, {Scalar(1)}, {Scalar(0)}), pr(2, {Scalar(2)}, {ratio(1, 2)}),
                                   pr(3, {Scalar(3)}, {Scalar(-1)})};
    auto p = feasibility::compute_params(pairs, 1);
    auto g = feasibility::reconstruct_evader(feasibility::evader_trace(pairs, 1, p));
    ExactFn fn = [&](std::span<const Scalar> x) { return g.evaluate_radial(x); };
    auto rep = game_run_exact(pairs, {fn});
    CHECK_FALSE(rep.entries[0].controlled);
    CHECK(*rep.entries[0].margin >= 1);
  }

  TEST_CASE("random moving maps satisfy the boundary hypotheses") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto map = random_moving_map(2, 2, 4, 2.25, 3, ratio(1, 4), seed);
      for (int k = 0; k <= 32; ++k) {
        fixedpoint::Vec z{-map.z_radius + 2 * map.z_radius * k / 32.0};
        CHECK(fixedpoint::norm_inf(map.f(z, map.t0)) < map.l);
        CHECK(fixedpoint::norm_inf(map.f(z, map.t1)) > map.l);
      }
    }
  }
}
