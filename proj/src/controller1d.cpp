#include "lipctl/controller1d.hpp"

#include <set>

#include "lipctl/errors.hpp"

namespace lipctl::controller1d {

Integer block_size(unsigned long j, unsigned long n, std::size_t d) {
  Integer base = Integer(j) * Integer(n + 1) + 1;
  Integer k;
  mpz_pow_ui(k.get_mpz_t(), base.get_mpz_t(), d);
  return k;
}

std::vector<Point> tile_centers(unsigned long j, unsigned long n, std::size_t d) {
  if (d < 1) throw InputError("tile_centers: d must be >= 1");
  const unsigned long r = j * (n + 1);
  const Scalar rr(static_cast<long>(r));
  Scalar rp = rr / Scalar(static_cast<long>(r + 1));
  // per-axis centers, decreasing: r - r'(2a+1)
  std::vector<Scalar> axis;
  for (unsigned long a = 0; a <= r; ++a) axis.push_back(rr - rp * Scalar(static_cast<long>(2 * a + 1)));
  if (block_size(j, n, d) > Integer(50'000'000)) throw ResourceError("tile_centers: block too large");

  std::vector<Point> out;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    Point z(d);
    for (std::size_t k = 0; k < d; ++k) z[k] = axis[idx[k]];
    out.push_back(std::move(z));
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (idx[k] + 1 < axis.size()) {
        ++idx[k];
        break;
      }
      idx[k] = 0;
      if (k == 0) return out;
    }
  }
}

std::vector<ControlPair> build_block(unsigned long j, unsigned long n, std::size_t d, std::span<const Scalar> xs,
                                     std::span<const std::size_t> labels) {
  Integer k = block_size(j, n, d);
  if (Integer(static_cast<unsigned long>(xs.size())) < k) {
    throw InsufficientPointsError("build_block: need " + k.get_str() + " points for j=" + std::to_string(j) +
                                  ", n=" + std::to_string(n) + ", have " + std::to_string(xs.size()));
  }
  if (!labels.empty() && labels.size() != xs.size()) throw InputError("build_block: labels size mismatch");
  const Scalar nn(static_cast<long>(n));
  const std::size_t kk = k.get_ui();
  for (std::size_t i = 0; i < kk; ++i) {
    if (xs[i] < 0 || xs[i] > nn) throw InputError("build_block: x outside [0, n]");
    if (i > 0 && xs[i] < xs[i - 1]) throw InputError("build_block: xs must be nondecreasing");
  }

  std::vector<Point> z = tile_centers(j, n, d);
  std::vector<ControlPair> out;
  out.reserve(kk);
  const Scalar jj(static_cast<long>(j));
  for (std::size_t i = 0; i < kk; ++i) {
    ControlPair pr;
    pr.index = labels.empty() ? i : labels[i];
    pr.x = Point{xs[i]};
    Scalar drift = jj * (nn - xs[i]);
    pr.y = std::move(z[i]);
    for (auto& c : pr.y) c -= drift;
    out.push_back(std::move(pr));
  }
  return out;
}

std::vector<ControlPair> Schedule::pairs() const {
  std::vector<ControlPair> all;
  for (const auto& b : blocks) all.insert(all.end(), b.pairs.begin(), b.pairs.end());
  return all;
}

Schedule build_schedule(const sequences::PointSeq& s, std::size_t d, unsigned long J) {
  if (s.m != 1) throw InputError("build_schedule: needs a one-dimensional sequence");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.points[i][0] < 0) {
      throw InputError("build_schedule: negative entry " + std::to_string(i) + "; split the sequence by sign first");
    }
    if (i > 0 && s.points[i][0] < s.points[i - 1][0]) throw InputError("build_schedule: sequence must be sorted");
  }
  Schedule sched;
  std::size_t next = 0;  // entries before `next` are consumed (smallest first)
  const Scalar top = s.empty() ? Scalar(0) : s.points.back()[0];
  const unsigned long n_limit = ceil_int(top).get_ui();

  for (unsigned long j = 1; j <= J; ++j) {
    bool placed = false;
    Integer best_deficit;
    for (unsigned long n = 0; n <= n_limit; ++n) {
      Integer k = block_size(j, n, d);
      // unused entries with x <= n
      std::size_t avail = 0;
      for (std::size_t i = next; i < s.size() && s.points[i][0] <= Scalar(static_cast<long>(n)); ++i) ++avail;
      if (Integer(static_cast<unsigned long>(avail)) >= k) {
        std::size_t kk = k.get_ui();
        std::vector<Scalar> xs;
        std::vector<std::size_t> labels;
        for (std::size_t i = next; i < next + kk; ++i) {
          xs.push_back(s.points[i][0]);
          labels.push_back(s.labels.empty() ? i : s.labels[i]);
        }
        sched.blocks.push_back({j, n, build_block(j, n, d, xs, labels)});
        next += kk;
        placed = true;
        break;
      }
      best_deficit = k - Integer(static_cast<unsigned long>(avail));
    }
    if (!placed) {
      throw InsufficientPointsError("build_schedule: no n works for j=" + std::to_string(j) + " (deficit " +
                                    best_deficit.get_str() + " at n=" + std::to_string(n_limit) + ")");
    }
  }
  return sched;
}

std::vector<ControlPair> dense_cluster_pairs(const Scalar& x_star, std::size_t count, std::size_t d,
                                             const Scalar& side) {
  if (count < 1) throw InputError("dense_cluster_pairs: count must be >= 1");
  if (side <= 0) throw InputError("dense_cluster_pairs: side must be positive");
  std::vector<ControlPair> out;
  std::set<Point> seen;
  for (unsigned level = 0; out.size() < count; ++level) {
    const unsigned long cells = 1UL << level;
    const Scalar width = 2 * side / Scalar(static_cast<long>(cells));
    std::vector<unsigned long> idx(d, 0);
    while (out.size() < count) {
      Point y(d);
      for (std::size_t k = 0; k < d; ++k) y[k] = -side + width * (Scalar(static_cast<long>(idx[k])) + Scalar(1, 2));
      if (seen.insert(y).second) out.push_back({out.size(), Point{x_star}, std::move(y)});
      std::size_t k = d;
      bool done = false;
      while (k > 0) {
        --k;
        if (idx[k] + 1 < cells) {
          ++idx[k];
          break;
        }
        idx[k] = 0;
        if (k == 0) done = true;
      }
      if (done) break;
    }
    if (level > 40) throw ResourceError("dense_cluster_pairs: refinement too deep");
  }
  return out;
}

}  // namespace lipctl::controller1d
