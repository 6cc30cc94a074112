#pragma once

#include <algorithm>
#include <complex>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "orbitdist/errors.hpp"

namespace orbitdist {

// Maximum cardinality matching in a bipartite graph with `left` and `right`
// vertices; adjacency lists index into the right side.
class HopcroftKarp {
 public:
  HopcroftKarp(std::size_t left, std::size_t right)
      : adj_(left), match_left_(left, kNil), match_right_(right, kNil), dist_(left) {}

  void add_edge(std::size_t l, std::size_t r) { adj_[l].push_back(r); }

  std::size_t solve() {
    std::size_t size = 0;
    while (bfs())
      for (std::size_t l = 0; l < adj_.size(); ++l)
        if (match_left_[l] == kNil && dfs(l)) ++size;
    return size;
  }

  std::size_t mate_of_left(std::size_t l) const { return match_left_[l]; }

  static constexpr std::size_t kNil = std::numeric_limits<std::size_t>::max();

 private:
  bool bfs() {
    std::queue<std::size_t> q;
    bool found = false;
    for (std::size_t l = 0; l < adj_.size(); ++l) {
      if (match_left_[l] == kNil) {
        dist_[l] = 0;
        q.push(l);
      } else {
        dist_[l] = kInf;
      }
    }
    while (!q.empty()) {
      const std::size_t l = q.front();
      q.pop();
      for (std::size_t r : adj_[l]) {
        const std::size_t next = match_right_[r];
        if (next == kNil) {
          found = true;
        } else if (dist_[next] == kInf) {
          dist_[next] = dist_[l] + 1;
          q.push(next);
        }
      }
    }
    return found;
  }

  bool dfs(std::size_t l) {
    for (std::size_t r : adj_[l]) {
      const std::size_t next = match_right_[r];
      if (next == kNil || (dist_[next] == dist_[l] + 1 && dfs(next))) {
        match_left_[l] = r;
        match_right_[r] = l;
        return true;
      }
    }
    dist_[l] = kInf;
    return false;
  }

  static constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_left_;
  std::vector<std::size_t> match_right_;
  std::vector<std::size_t> dist_;
};

// Optimal matching distance min_sigma max_i |alpha_i - beta_sigma(i)|, as a
// bottleneck assignment: binary search over the sorted pairwise distances
// with a perfect-matching test on each threshold graph.
inline double delta_matching(std::span<const std::complex<double>> alpha,
                             std::span<const std::complex<double>> beta) {
  const std::size_t n = alpha.size();
  if (n != beta.size()) throw LengthMismatch("spectra of different lengths");
  if (n == 0) throw LengthMismatch("empty spectra");
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = std::abs(alpha[i] - beta[j]);
  std::vector<double> candidates = dist;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto perfect = [&](double threshold) {
    HopcroftKarp hk(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (dist[i * n + j] <= threshold) hk.add_edge(i, j);
    return hk.solve() == n;
  };

  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (perfect(candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

inline double delta_matching(std::span<const double> alpha, std::span<const double> beta) {
  std::vector<std::complex<double>> a(alpha.begin(), alpha.end()), b(beta.begin(), beta.end());
  return delta_matching(a, b);
}

}  // namespace orbitdist
