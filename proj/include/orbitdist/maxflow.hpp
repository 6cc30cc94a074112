#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace orbitdist {

// Highest-label push-relabel on integer capacities.
class PushRelabel {
 public:
  using Flow = std::int64_t;

  explicit PushRelabel(std::size_t nodes) : adj_(nodes) {}

  void add_edge(std::size_t from, std::size_t to, Flow capacity) {
    adj_[from].push_back({to, adj_[to].size(), capacity});
    adj_[to].push_back({from, adj_[from].size() - 1, 0});
  }

  Flow max_flow(std::size_t source, std::size_t sink) {
    const std::size_t n = adj_.size();
    height_.assign(n, 0);
    excess_.assign(n, 0);
    count_.assign(2 * n + 1, 0);
    buckets_.assign(2 * n + 1, {});
    current_.assign(n, 0);
    top_ = 0;

    height_[source] = n;
    count_[0] = n - 1;
    count_[n] = 1;
    for (auto& e : adj_[source]) {
      if (e.cap == 0) continue;
      const Flow f = e.cap;
      e.cap -= f;
      adj_[e.to][e.rev].cap += f;
      excess_[e.to] += f;
      excess_[source] -= f;
      if (e.to != sink && excess_[e.to] == f) activate(e.to);
    }

    while (true) {
      while (top_ > 0 && buckets_[top_].empty()) --top_;
      if (buckets_[top_].empty()) break;
      const std::size_t v = buckets_[top_].back();
      buckets_[top_].pop_back();
      if (v == source || v == sink) continue;
      discharge(v, source, sink);
    }
    return excess_[sink];
  }

 private:
  struct Edge {
    std::size_t to;
    std::size_t rev;
    Flow cap;
  };

  void activate(std::size_t v) {
    buckets_[height_[v]].push_back(v);
    top_ = std::max(top_, height_[v]);
  }

  void discharge(std::size_t v, std::size_t source, std::size_t sink) {
    const std::size_t n = adj_.size();
    while (excess_[v] > 0) {
      if (current_[v] == adj_[v].size()) {
        // Relabel; gap heuristic lifts everything above an emptied level.
        const std::size_t old = height_[v];
        std::size_t next = 2 * n;
        for (const auto& e : adj_[v])
          if (e.cap > 0) next = std::min(next, height_[e.to] + 1);
        --count_[old];
        if (count_[old] == 0 && old < n) {
          for (std::size_t u = 0; u < n; ++u)
            if (height_[u] > old && height_[u] < n && u != source) {
              --count_[height_[u]];
              height_[u] = n + 1;
              ++count_[height_[u]];
            }
          next = std::max(next, n + 1);
        }
        height_[v] = next;
        ++count_[next];
        current_[v] = 0;
        if (next >= 2 * n) return;
        continue;
      }
      auto& e = adj_[v][current_[v]];
      if (e.cap > 0 && height_[v] == height_[e.to] + 1) {
        const Flow f = std::min(excess_[v], e.cap);
        e.cap -= f;
        adj_[e.to][e.rev].cap += f;
        excess_[v] -= f;
        const bool was_idle = excess_[e.to] == 0;
        excess_[e.to] += f;
        if (was_idle && e.to != source && e.to != sink) activate(e.to);
      } else {
        ++current_[v];
      }
    }
  }

  std::vector<std::vector<Edge>> adj_;
  std::vector<std::size_t> height_;
  std::vector<Flow> excess_;
  std::vector<std::size_t> count_;
  std::vector<std::vector<std::size_t>> buckets_;
  std::vector<std::size_t> current_;
  std::size_t top_ = 0;
};

}  // namespace orbitdist
