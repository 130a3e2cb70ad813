#pragma once

// Test subjects and the control game: grid-sampled Lipschitz functions with
// multilinear interpolation, the lattice counterexample, and margin reports.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "lipctl/feasibility.hpp"
#include "lipctl/fixedpoint.hpp"
#include "lipctl/geometry.hpp"

namespace lipctl::harness {

using feasibility::ControlPair;

/// Deterministic integer draws from mt19937_64, identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  /// Uniform in [lo, hi].
  long uniform(long lo, long hi);
  double unit();  // [0, 1)
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// Values on the lattice lo + h * a, a_k in [0, nodes_k), node order
/// lexicographic (last axis fastest). Evaluation clamps to the domain box and
/// interpolates multilinearly.
class SampledLipschitz {
 public:
  SampledLipschitz() = default;
  SampledLipschitz(Scalar j, Point lo, Scalar h, std::vector<std::size_t> nodes, std::vector<Point> values);

  std::size_t m() const { return lo_.size(); }
  std::size_t d() const { return values_.empty() ? 0 : values_.front().size(); }
  const Scalar& j() const { return j_; }
  const Point& lo() const { return lo_; }
  const Scalar& h() const { return h_; }
  const std::vector<std::size_t>& nodes() const { return nodes_; }
  const std::vector<Point>& values() const { return values_; }
  geometry::Box domain() const;

  std::size_t node_index(std::span<const std::size_t> a) const;
  Point node_position(std::span<const std::size_t> a) const;

  Point evaluate(std::span<const Scalar> x) const;
  std::vector<double> evaluate(std::span<const double> x) const;

  /// Largest |value difference| / h over all grid edges and output coordinates.
  Scalar edge_slope() const;
  /// Max over cells and outputs of the sum over axes of the cell's largest
  /// edge slope along that axis: a max-norm Lipschitz constant of the
  /// interpolant.
  Scalar lipschitz_bound() const;

 private:
  Scalar j_;
  Point lo_;
  Scalar h_;
  std::vector<std::size_t> nodes_;
  std::vector<Point> values_;
  std::vector<double> lo_d_;
  double h_d_ = 0;
  std::vector<std::vector<double>> values_d_;
};

/// Random member of the j-Lipschitz class on `domain`: nodes are visited in
/// order, each value drawn uniformly (on a fine dyadic grid) from the cubes of
/// radius j h / m around the already assigned lower neighbours; the result is
/// then shifted so that f(0) is uniform in the cube of radius j.
SampledLipschitz sample_lipschitz(std::size_t m, std::size_t d, const Scalar& j, const geometry::Box& domain,
                                  const Scalar& h, std::uint64_t seed);

/// d = 1 and integer x only. hbar(i) = 1 if y_i <= 0 else -1 at each x_i,
/// 0 at every other node of the half-integer grid over the padded bounding
/// box of the x_i.
SampledLipschitz lattice_counterexample(const std::vector<ControlPair>& pairs);

struct GameEntry {
  bool controlled = false;
  std::optional<std::size_t> controlling_index;  // label of the closest pair when controlled
  std::optional<Scalar> margin;                  // min_i |f(x_i) - y_i|; nullopt means no pairs
};

struct GameReport {
  std::vector<GameEntry> entries;
  double controlled_fraction = 0;
  std::optional<Scalar> worst_margin;  // largest margin; nullopt when some margin is infinite
};

GameReport game_run(const std::vector<ControlPair>& pairs, const std::vector<SampledLipschitz>& functions);

using ExactFn = std::function<Point(std::span<const Scalar>)>;
GameReport game_run_exact(const std::vector<ControlPair>& pairs, const std::vector<ExactFn>& functions);

/// "#schema=lipctl-game/1" then one row per function.
void write_game_report(std::ostream& os, const GameReport& report);

/// "sampledfn 1 <m> <d>", then "j", "h", "lo", "nodes" lines, then node values.
void write_sampled(std::ostream& os, const SampledLipschitz& f);
SampledLipschitz read_sampled(std::istream& is);

/// Moving map on D x [t0, t1] from a sampled function on R^m, with the linear
/// section map (t0 / 2l)(y_1 - y_m, ..., y_(m-1) - y_m).
fixedpoint::MovingMap moving_map_from(SampledLipschitz f, double l, double t0, double t1);

/// phi + ((t - t0) / (t1 - t0)) 2l u with phi a sampled 1-Lipschitz map
/// rescaled to |phi| <= l/2 and u a random unit vector: satisfies the
/// boundary hypotheses on D = [-t0, t0]^(m-1).
fixedpoint::MovingMap random_moving_map(std::size_t m, std::size_t d, double l, double t0, double t1,
                                        const Scalar& h, std::uint64_t seed);

}  // namespace lipctl::harness
