#pragma once

// Reference computations that share no code with the library kernels.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "lipctl/feasibility.hpp"
#include "lipctl/geometry.hpp"

namespace oracle {

using lipctl::Point;
using lipctl::Scalar;

// Coordinate-compressed sweep: measure of the union of the region's boxes,
// counting every elementary cell whose center lies in some box.
inline Scalar sweep_measure(const std::vector<lipctl::geometry::Box>& boxes, std::size_t dim) {
  if (boxes.empty()) return 0;
  std::vector<std::vector<Scalar>> cuts(dim);
  for (const auto& b : boxes) {
    for (std::size_t k = 0; k < dim; ++k) {
      cuts[k].push_back(b.lo(k));
      cuts[k].push_back(b.hi(k));
    }
  }
  for (auto& c : cuts) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  Scalar total = 0;
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t k = 0; k < dim; ++k)
    if (cuts[k].size() < 2) return 0;
  while (true) {
    Point mid(dim);
    Scalar vol = 1;
    for (std::size_t k = 0; k < dim; ++k) {
      mid[k] = (cuts[k][idx[k]] + cuts[k][idx[k] + 1]) / 2;
      vol *= cuts[k][idx[k] + 1] - cuts[k][idx[k]];
    }
    for (const auto& b : boxes) {
      bool in = true;
      for (std::size_t k = 0; k < dim && in; ++k) in = b.lo(k) <= mid[k] && mid[k] <= b.hi(k);
      if (in) {
        total += vol;
        break;
      }
    }
    std::size_t k = dim;
    while (k > 0) {
      --k;
      if (idx[k] + 2 < cuts[k].size()) {
        ++idx[k];
        break;
      }
      idx[k] = 0;
      if (k == 0) return total;
    }
  }
}

// Max-norm distance from p to a closed box.
inline Scalar box_dist(const lipctl::geometry::Box& b, const Point& p) {
  Scalar d = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    Scalar gap = 0;
    if (p[k] < b.lo(k)) gap = b.lo(k) - p[k];
    if (p[k] > b.hi(k)) gap = p[k] - b.hi(k);
    d = std::max(d, gap);
  }
  return d;
}

inline bool in_boxes(const std::vector<lipctl::geometry::Box>& boxes, const Point& p) {
  for (const auto& b : boxes)
    if (b.contains(p)) return true;
  return false;
}

// Exhaustive search for an evader of d = 1 pairs whose x and y lie on the
// 1/4 grid: values v_i = f(x_i) in quarter units, |v_i| <= j (1 + x_i),
// |v_(i+1) - v_i| <= j (x_(i+1) - x_i), |v_i - y_i| >= 1. Returns true when
// no evader exists, i.e. the pairs control the class.
inline bool brute_force_controlled(const std::vector<lipctl::feasibility::ControlPair>& pairs, long j) {
  struct Q {
    long x, y;
  };
  std::vector<Q> q;
  for (const auto& pr : pairs) {
    Scalar x4 = pr.x[0] * 4, y4 = pr.y[0] * 4;
    q.push_back({x4.get_num().get_si(), y4.get_num().get_si()});
  }
  std::stable_sort(q.begin(), q.end(), [](const Q& a, const Q& b) { return a.x < b.x; });
  // f(0) ranges over [-j, j]; position 0 acts as a free start with slack
  std::function<bool(std::size_t, long, long)> evade = [&](std::size_t i, long prev_x, long prev_v) -> bool {
    if (i == q.size()) return true;
    const long reach = j * (q[i].x - prev_x);
    for (long v = prev_v - reach; v <= prev_v + reach; ++v) {
      if (std::labs(v - q[i].y) < 4) continue;
      if (evade(i + 1, q[i].x, v)) return true;
    }
    return false;
  };
  for (long v0 = -4 * j; v0 <= 4 * j; ++v0)
    if (evade(0, 0, v0)) return false;
  return true;
}

// Grid search for an evader when every x and y coordinate is a multiple of
// 1/unit: reachable values of f(x_i) on the 1/unit lattice, |f(0)| <= j,
// propagated by max-norm dilation and deletion of the open unit cube about
// each y. Returns true when the reachable set empties.
inline bool grid_controlled(const std::vector<lipctl::feasibility::ControlPair>& pairs, long j, std::size_t d,
                            long unit) {
  auto units = [unit](const Scalar& v) {
    Scalar s = v * unit;
    if (s.get_den() != 1) throw std::logic_error("grid_controlled: value off the grid");
    return s.get_num().get_si();
  };
  struct Q {
    long x;
    std::vector<long> y;
  };
  std::vector<Q> q;
  long xmax = 0;
  for (const auto& pr : pairs) {
    Q e{units(pr.x[0]), {}};
    for (const auto& c : pr.y) e.y.push_back(units(c));
    xmax = std::max(xmax, e.x);
    q.push_back(std::move(e));
  }
  std::stable_sort(q.begin(), q.end(), [](const Q& a, const Q& b) { return a.x < b.x; });
  const long B = j * (unit + xmax), side = 2 * B + 1;
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= static_cast<std::size_t>(side);
  auto coord = [&](std::size_t flat, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) flat /= static_cast<std::size_t>(side);
    return static_cast<long>(flat % static_cast<std::size_t>(side)) - B;
  };
  std::vector<char> cur(total, 0);
  for (std::size_t f = 0; f < total; ++f) {
    bool in = true;
    for (std::size_t k = 0; k < d; ++k) in = in && std::labs(coord(f, k)) <= j * unit;
    cur[f] = in;
  }
  long prev = 0;
  for (const auto& e : q) {
    const long reach = j * (e.x - prev);
    prev = e.x;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < d; ++k, stride *= static_cast<std::size_t>(side)) {
      std::vector<char> next(total, 0);
      for (std::size_t f = 0; f < total; ++f) {
        if (!cur[f]) continue;
        const long c = coord(f, k);
        for (long t = std::max(-B, c - reach); t <= std::min(B, c + reach); ++t)
          next[static_cast<std::size_t>(static_cast<long>(f) + (t - c) * static_cast<long>(stride))] = 1;
      }
      cur.swap(next);
    }
    bool any = false;
    for (std::size_t f = 0; f < total; ++f) {
      if (!cur[f]) continue;
      bool near = true;
      for (std::size_t k = 0; k < d; ++k) near = near && std::labs(coord(f, k) - e.y[k]) < unit;
      if (near) cur[f] = 0;
      any = any || cur[f];
    }
    if (!any) return true;
  }
  return false;
}

}  // namespace oracle
