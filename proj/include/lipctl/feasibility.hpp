#pragma once

// Feasible-value propagation for radial evaders, the measure lower bound on
// the feasible sets, and the exact control oracle for one-dimensional inputs.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lipctl/geometry.hpp"
#include "lipctl/scalar.hpp"

namespace lipctl::feasibility {

/// (x, y) controls f when |f(x) - y| < 1 in the max norm.
struct ControlPair {
  std::size_t index = 0;
  Point x;
  Point y;
};

/// Stable sort by |x| with labels preserved.
std::vector<ControlPair> sort_by_radius(std::vector<ControlPair> pairs);

struct EvaderParams {
  Scalar alpha;      // max over positive-radius entries of i / |x_i|^d
  Scalar beta;       // dyadic upper bound of 2 alpha^(1/d)
  std::size_t d = 1;
  std::size_t k0 = 0;  // entries with x = 0
};

inline constexpr unsigned kBetaBits = 40;

/// Requires pairs sorted by |x| and at least one with |x| > 0.
EvaderParams compute_params(const std::vector<ControlPair>& pairs, std::size_t d);

/// A point farther than 1 from every y of the zero-radius pairs.
Point start_point(const std::vector<ControlPair>& zero_pairs, std::size_t d);

/// Piecewise-linear path t -> g(t) in R^d; constant outside the breakpoints.
class RadialPLFunction {
 public:
  RadialPLFunction() = default;
  /// Breakpoints must be strictly increasing and match values in length.
  RadialPLFunction(std::vector<Scalar> breakpoints, std::vector<Point> values, Scalar lipschitz);

  Point evaluate(const Scalar& t) const;
  /// Radial lift f(x) = g(|x|).
  Point evaluate_radial(std::span<const Scalar> x) const { return evaluate(norm_inf(x)); }

  /// Largest per-segment, per-coordinate slope.
  Scalar max_slope() const;

  const std::vector<Scalar>& breakpoints() const { return breakpoints_; }
  const std::vector<Point>& values() const { return values_; }
  const Scalar& lipschitz() const { return lipschitz_; }
  std::size_t dim() const { return values_.empty() ? 0 : values_.front().size(); }

 private:
  std::vector<Scalar> breakpoints_;
  std::vector<Point> values_;
  Scalar lipschitz_;
};

struct FeasTrace {
  EvaderParams params;
  std::vector<ControlPair> pairs;      // positive-radius pairs, in processing order
  std::vector<Scalar> radii;           // t_0 = 0, t_1 .. t_N
  std::vector<geometry::Region> regions;  // D_0 .. D_N
  std::vector<Scalar> measures;        // mu(D_i)
};

/// D_0 = {start}; D_{i+1} = expand(D_i, beta (t_{i+1} - t_i)) minus the open
/// unit cube about y_{i+1}. Pairs at equal radius are subtracted one after
/// the other with no expansion between them.
FeasTrace evader_trace(const std::vector<ControlPair>& pairs, std::size_t d, const EvaderParams& params,
                       const geometry::Limits& limits = {});

struct MeasureBoundStep {
  std::size_t i = 0;
  Scalar t;
  std::size_t boxes = 0;
  Scalar measure;
  Scalar bound;   // 2^(d+1) alpha t_i^d - 2^d i
  Scalar margin;  // measure - bound
};

struct MeasureBoundReport {
  std::vector<MeasureBoundStep> steps;
  bool ok = true;
  std::optional<std::size_t> first_violation;
};

/// Checks mu(D_i) >= 2^(d+1) alpha t_i^d - 2^d i at every step, exactly.
MeasureBoundReport check_measure_bound(const FeasTrace& trace);

/// Backtracks a concrete evader through the trace. Throws InternalError if a
/// backtracking intersection is empty.
RadialPLFunction reconstruct_evader(const FeasTrace& trace);

/// Trace rows as CSV with a schema header line.
void write_trace_csv(std::ostream& os, const FeasTrace& trace, const MeasureBoundReport& report);

struct ControlVerdict {
  bool controlled = false;
  std::optional<std::size_t> emptied_at;     // pair position where the feasible set vanished
  std::optional<RadialPLFunction> witness;   // j-Lipschitz, |f(0)| <= j, evades every pair
};

/// Exact oracle for m = 1: is every j-Lipschitz f : R -> R^d with |f(0)| <= j
/// controlled by the pairs? All x must lie in [0, n].
ControlVerdict feasible_control_check(const std::vector<ControlPair>& pairs, const Scalar& j, std::size_t d,
                                      const Scalar& n, const geometry::Limits& limits = {});

/// "pairs 1 <m> <d> <count>" then per line: index, x coordinates, y coordinates.
void write_pairs(std::ostream& os, const std::vector<ControlPair>& pairs, std::size_t m, std::size_t d);
std::vector<ControlPair> read_pairs(std::istream& is, std::size_t* m = nullptr, std::size_t* d = nullptr);

/// "plfunction 1 <d> <count>" then "lipschitz <L>", then per line t and g(t).
void write_function(std::ostream& os, const RadialPLFunction& g);

}  // namespace lipctl::feasibility
