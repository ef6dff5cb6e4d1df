#pragma once

// Exact minimum-cost perfect assignment on an n x n cost function.
//
// Instances with n <= kExactTieBreakLimit are solved by dynamic programming
// over column subsets, which also yields the lexicographically smallest
// optimal permutation. Mid-sized instances use the O(n^3) shortest
// augmenting path (Hungarian) method. Above kHungarianLimit an epsilon-scaling
// auction takes over: costs are quantized to integers on a 2^-50 grid of
// their range and scaled by n + 1, so the final epsilon = 1 phase is optimal
// for the quantized problem. Both evaluate costs on demand and keep memory
// O(n) (the auction also stores a short candidate list per row).

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "selfcorr/error.hpp"

namespace selfcorr {

inline constexpr Eigen::Index kExactTieBreakLimit = 12;
inline constexpr Eigen::Index kHungarianLimit = 128;

struct Assignment {
  /// permutation[i] is the column assigned to row i.
  std::vector<Eigen::Index> permutation;
  double cost = 0.0;
};

bool is_permutation(const std::vector<Eigen::Index>& perm);

namespace detail {

inline bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

template <typename CostFn>
Assignment solve_by_subset_dp(Eigen::Index n, CostFn& cost) {
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) = cost(i, j);

  // best[mask]: minimal cost of assigning rows popcount(mask)..n-1 to the
  // columns outside mask.
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<double> best(std::size_t{full} + 1, std::numeric_limits<double>::infinity());
  best[full] = 0.0;
  for (std::uint32_t mask = full; mask-- > 0;) {
    const int row = std::popcount(mask);
    double value = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::uint32_t bit = std::uint32_t{1} << j;
      if (mask & bit) continue;
      value = std::min(value, c(row, j) + best[mask | bit]);
    }
    best[mask] = value;
  }

  Assignment out;
  out.permutation.resize(static_cast<std::size_t>(n));
  std::uint32_t mask = 0;
  for (Eigen::Index row = 0; row < n; ++row) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::uint32_t bit = std::uint32_t{1} << j;
      if (mask & bit) continue;
      if (nearly_equal(c(row, j) + best[mask | bit], best[mask])) {
        out.permutation[static_cast<std::size_t>(row)] = j;
        mask |= bit;
        break;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) out.cost += c(i, out.permutation[static_cast<std::size_t>(i)]);
  return out;
}

template <typename CostFn>
Assignment solve_by_hungarian(Eigen::Index n, CostFn& cost) {
  const auto sz = static_cast<std::size_t>(n) + 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(sz, 0.0), v(sz, 0.0), minv(sz);
  std::vector<std::size_t> owner(sz, 0), way(sz, 0);
  std::vector<char> used(sz);

  for (std::size_t i = 1; i < sz; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j < sz; ++j) {
        if (used[j]) continue;
        const double reduced = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j < sz; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.permutation.resize(static_cast<std::size_t>(n));
  for (std::size_t j = 1; j < sz; ++j) out.permutation[owner[j] - 1] = static_cast<Eigen::Index>(j - 1);
  for (Eigen::Index i = 0; i < n; ++i) out.cost += cost(i, out.permutation[static_cast<std::size_t>(i)]);
  return out;
}


inline constexpr std::size_t kAuctionCandidates = 32;
inline constexpr std::int64_t kAuctionSlack = 64;
inline constexpr std::int64_t kAuctionEpsilonRatio = 8;

/// Forward Gauss-Seidel auction with epsilon scaling. Each row caches the
/// columns with the smallest cost + price seen at its last full scan, plus
/// the next-smallest such value. Prices only rise, so that value stays a
/// lower bound for every column outside the cache; a bid rescans the whole
/// row only when the bound cannot certify the cache's two best offers.
template <typename CostFn>
Assignment solve_by_auction(Eigen::Index n, CostFn& cost) {
  if (n == 1) return {{0}, cost(0, 0)};
  const auto un = static_cast<std::size_t>(n);
  // Cache size k leaves at least one column to bound.
  const std::size_t k = std::min(un - 1, kAuctionCandidates);

  // Bounded max-heap of the k + 1 smallest (key, column) pairs of one row.
  // Its top is the (k + 1)-th smallest, which bounds every column left out.
  using Entry = std::pair<std::int64_t, std::size_t>;
  std::vector<Entry> heap;
  heap.reserve(k + 1);
  auto offer_heap = [&](std::int64_t key, std::size_t j) {
    if (heap.size() <= k) {
      heap.emplace_back(key, j);
      std::push_heap(heap.begin(), heap.end());
    } else if (Entry{key, j} < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = {key, j};
      std::push_heap(heap.begin(), heap.end());
    }
  };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < un; ++i) {
    for (std::size_t j = 0; j < un; ++j) {
      const double c = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "assignment costs must be finite");
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  }

  Assignment out;
  out.permutation.resize(un);
  if (!(hi > lo)) {
    std::iota(out.permutation.begin(), out.permutation.end(), Eigen::Index{0});
    out.cost = lo * static_cast<double>(n);
    return out;
  }

  const std::int64_t stride = n + 1;
  const double scale = std::ldexp(1.0, 50) / ((hi - lo) * static_cast<double>(stride));
  auto quantize = [&](double c) { return static_cast<std::int64_t>((c - lo) * scale + 0.5) * stride; };

  const std::int64_t none = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> price(un, 0);
  std::vector<std::int64_t> owner(un);
  std::vector<std::size_t> cache(un * k);
  std::vector<std::int64_t> cache_cost(un * k);
  std::vector<std::int64_t> outside(un);

  // Quantized costs are nonnegative and prices only grow within a phase, so
  // a column whose price alone exceeds the current bound can be skipped.
  auto rescan = [&](std::size_t i) {
    heap.clear();
    for (std::size_t j = 0; j < un; ++j) {
      if (heap.size() > k && price[j] > heap.front().first) continue;
      const std::int64_t q = quantize(cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      offer_heap(q + price[j], j);
    }
    std::pop_heap(heap.begin(), heap.end());
    outside[i] = heap.back().first;
    for (std::size_t r = 0; r < k; ++r) {
      cache[i * k + r] = heap[r].second;
      cache_cost[i * k + r] = heap[r].first - price[heap[r].second];
    }
  };
  for (std::size_t i = 0; i < un; ++i) rescan(i);
  std::vector<std::size_t> queue;
  queue.reserve(un);

  std::int64_t eps = std::max<std::int64_t>(1, (std::int64_t{1} << 50) / kAuctionEpsilonRatio);
  for (;;) {
    std::fill(owner.begin(), owner.end(), -1);
    queue.resize(un);
    for (std::size_t i = 0; i < un; ++i) queue[i] = un - 1 - i;
    // Before the last phase a bid may miss the true second-best offer by up
    // to `slack`; that only loosens epsilon-complementary slackness by the
    // same amount, and the last phase runs with slack 0.
    const std::int64_t slack = eps == 1 ? 0 : kAuctionSlack * eps;
    while (!queue.empty()) {
      const std::size_t i = queue.back();
      queue.pop_back();
      std::int64_t best = none, second = none;
      std::size_t pick = 0;
      auto offer = [&](std::size_t j, std::int64_t r) {
        if (r < best || (r == best && j < pick)) {
          second = best;
          best = r;
          pick = j;
        } else if (r < second) {
          second = r;
        }
      };
      for (std::size_t r = 0; r < k; ++r) offer(cache[i * k + r], cache_cost[i * k + r] + price[cache[i * k + r]]);
      if (second > outside[i] + slack) {
        rescan(i);
        best = second = none;
        for (std::size_t r = 0; r < k; ++r) offer(cache[i * k + r], cache_cost[i * k + r] + price[cache[i * k + r]]);
        second = std::min(second, outside[i]);
      }
      price[pick] += second - best + eps;
      if (price[pick] > (std::int64_t{1} << 61)) throw Error(ErrorKind::InvalidArgument, "auction prices overflowed");
      if (owner[pick] >= 0) queue.push_back(static_cast<std::size_t>(owner[pick]));
      owner[pick] = static_cast<std::int64_t>(i);
    }
    if (eps == 1) break;
    eps = std::max<std::int64_t>(1, eps / kAuctionEpsilonRatio);
    const std::int64_t shift = *std::min_element(price.begin(), price.end());
    for (auto& p : price) p -= shift;
    for (auto& b : outside) b -= shift;
  }

  for (std::size_t j = 0; j < un; ++j) out.permutation[static_cast<std::size_t>(owner[j])] = static_cast<Eigen::Index>(j);
  for (Eigen::Index i = 0; i < n; ++i) out.cost += cost(i, out.permutation[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace detail

/// `cost(i, j)` must be finite for every row i and column j in [0, n).
template <typename CostFn>
Assignment solve_assignment(Eigen::Index n, CostFn&& cost) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "assignment needs n >= 1");
  if (n <= kExactTieBreakLimit) return detail::solve_by_subset_dp(n, cost);
  if (n <= kHungarianLimit) return detail::solve_by_hungarian(n, cost);
  return detail::solve_by_auction(n, cost);
}

inline Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw Error(ErrorKind::SizeMismatch, "cost matrix must be square");
  return solve_assignment(cost.rows(), [&cost](Eigen::Index i, Eigen::Index j) { return cost(i, j); });
}

}  // namespace selfcorr
