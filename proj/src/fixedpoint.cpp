#include "lipctl/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lipctl/errors.hpp"

namespace lipctl::fixedpoint {

double norm_inf(const Vec& v) {
  double n = 0;
  for (double x : v) n = std::max(n, std::fabs(x));
  return n;
}

std::pair<Vec, double> retract(const Vec& y, double t, double l, double t0, double t1) {
  const double n = norm_inf(y);
  const double s = n > l ? l / n : 1.0;
  Vec r(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) r[k] = s * y[k];
  return {std::move(r), std::min(t1, std::max(t0, t))};
}

namespace {

// Calls fn(index vector) over {0..n-1}^dim, lexicographic.
template <typename Fn>
void for_each_index(std::size_t dim, std::size_t n, Fn&& fn) {
  std::vector<std::size_t> a(dim, 0);
  while (true) {
    fn(a);
    std::size_t k = dim;
    while (k > 0) {
      --k;
      if (a[k] + 1 < n) {
        ++a[k];
        break;
      }
      a[k] = 0;
      if (k == 0) return;
    }
    if (dim == 0) return;
  }
}

struct Searcher {
  const MovingMap& map;
  std::size_t evaluations = 0;
  std::size_t cap;

  // point p = (y_1..y_d, t)
  double displacement(const Vec& p) {
    if (++evaluations > cap) throw ResourceError("find_crossing: evaluation cap reached");
    Vec y(p.begin(), p.end() - 1);
    const double t = p.back();
    Vec yp = map.f(map.g(y), t);
    const double tp = t - norm_inf(yp) + map.l;
    auto [ry, rt] = retract(yp, tp, map.l, map.t0, map.t1);
    double disp = std::fabs(rt - t);
    for (std::size_t k = 0; k < y.size(); ++k) disp = std::max(disp, std::fabs(ry[k] - y[k]));
    return disp;
  }

  Vec clamp(Vec p) const {
    for (std::size_t k = 0; k + 1 < p.size(); ++k) p[k] = std::clamp(p[k], -map.l, map.l);
    p.back() = std::clamp(p.back(), map.t0, map.t1);
    return p;
  }
};

Crossing residuals(const MovingMap& map, const Vec& p, double disp) {
  Crossing c;
  Vec y(p.begin(), p.end() - 1);
  c.z = map.g(y);
  c.t = p.back();
  c.y = map.f(c.z, c.t);
  c.sphere_residual = std::fabs(norm_inf(c.y) - map.l);
  Vec back = map.g(c.y);
  double sec = 0;
  for (std::size_t k = 0; k < back.size(); ++k) sec = std::max(sec, std::fabs(back[k] - c.z[k]));
  c.section_residual = sec;
  c.displacement = disp;
  return c;
}

}  // namespace

Crossing find_crossing(const MovingMap& map, const SearchOptions& opts) {
  if (!map.f || !map.g) throw InputError("find_crossing: map and section must be set");
  if (!(map.l > 0) || !(map.t1 > map.t0)) throw InputError("find_crossing: need l > 0 and t1 > t0");
  const double grid_step = opts.grid_step > 0 ? opts.grid_step : (map.t1 - map.t0) / 64;
  const double tol = opts.tol > 0 ? opts.tol : 1e-6 * map.l;
  const std::size_t d = map.d;

  // boundary hypotheses on a z grid
  const std::size_t nzn = map.zdim == 0 ? 1 : (map.zdim == 1 ? 65 : (map.zdim == 2 ? 17 : 5));
  for_each_index(map.zdim, nzn, [&](const std::vector<std::size_t>& a) {
    Vec z(map.zdim);
    for (std::size_t k = 0; k < map.zdim; ++k)
      z[k] = nzn == 1 ? 0.0 : -map.z_radius + 2 * map.z_radius * static_cast<double>(a[k]) / (nzn - 1);
    const double lo = norm_inf(map.f(z, map.t0));
    const double hi = norm_inf(map.f(z, map.t1));
    if (!(lo < map.l) || !(hi > map.l)) {
      std::ostringstream msg;
      msg << "find_crossing: boundary hypothesis fails at z=(";
      for (std::size_t k = 0; k < z.size(); ++k) msg << (k ? ", " : "") << z[k];
      msg << "): |f(z,t0)|=" << lo << ", |f(z,t1)|=" << hi << ", l=" << map.l;
      throw HypothesisError(msg.str());
    }
  });

  Searcher s{map, 0, opts.max_evaluations};

  // coarse scan over B x J
  const std::size_t ny = d <= 2 ? 33 : (d == 3 ? 17 : 9);
  const std::size_t nt = static_cast<std::size_t>(std::ceil((map.t1 - map.t0) / grid_step)) + 1;
  const double dy = 2 * map.l / static_cast<double>(ny - 1);
  const double dt = (map.t1 - map.t0) / static_cast<double>(nt - 1);
  std::vector<std::pair<double, Vec>> scan;
  for_each_index(d, ny, [&](const std::vector<std::size_t>& a) {
    Vec p(d + 1);
    for (std::size_t k = 0; k < d; ++k) p[k] = -map.l + dy * static_cast<double>(a[k]);
    for (std::size_t it = 0; it < nt; ++it) {
      p[d] = map.t0 + dt * static_cast<double>(it);
      scan.emplace_back(s.displacement(p), p);
    }
  });
  std::sort(scan.begin(), scan.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  // distinct starting cells
  std::vector<std::pair<double, Vec>> starts;
  for (const auto& cand : scan) {
    if (starts.size() >= opts.starts) break;
    bool near = false;
    for (const auto& st : starts) {
      bool close = std::fabs(st.second[d] - cand.second[d]) <= 2 * dt;
      for (std::size_t k = 0; k < d && close; ++k) close = std::fabs(st.second[k] - cand.second[k]) <= 2 * dy;
      if (close) near = true;
    }
    if (!near) starts.push_back(cand);
  }

  Crossing best;
  bool have_best = false;
  auto score = [](const Crossing& c) { return std::max(c.sphere_residual, c.section_residual); };

  for (auto [disp, p] : starts) {
    Vec w(d + 1, dy);
    w[d] = dt;
    unsigned halvings = 0;
    std::size_t moves = 0;
    while (halvings < opts.levels && moves < 64 * (opts.levels + 1)) {
      Vec best_p = p;
      double best_disp = disp;
      for_each_index(d + 1, 5, [&](const std::vector<std::size_t>& a) {
        Vec q(d + 1);
        for (std::size_t k = 0; k <= d; ++k) q[k] = p[k] + w[k] * (static_cast<double>(a[k]) - 2.0) / 2.0;
        q = s.clamp(std::move(q));
        double v = s.displacement(q);
        if (v < best_disp) {
          best_disp = v;
          best_p = std::move(q);
        }
      });
      if (best_p == p) {
        for (auto& x : w) x /= 2;
        ++halvings;
      } else {
        p = std::move(best_p);
        disp = best_disp;
        ++moves;
      }
    }
    Crossing c = residuals(map, p, disp);
    c.evaluations = s.evaluations;
    if (!have_best || score(c) < score(best)) {
      best = c;
      have_best = true;
    }
    if (score(best) <= tol && best.t > map.t0 && best.t < map.t1) return best;
  }

  std::ostringstream msg;
  msg << "find_crossing: tolerance " << tol << " not reached";
  if (have_best) {
    msg << "; best displacement " << best.displacement << ", sphere residual " << best.sphere_residual
        << ", section residual " << best.section_residual << " at t=" << best.t;
  }
  throw NotFoundError(msg.str());
}

}  // namespace lipctl::fixedpoint
