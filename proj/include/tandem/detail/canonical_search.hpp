#pragma once

// Shared single-source machinery behind every "canonical" shortest path in
// the project: minimum cost, then fewest edges, then lexicographically
// smallest edge-id sequence. Road-graph queries and MAPF low-level searches
// both go through here so that equal-cost tie-breaks agree exactly.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

namespace tandem::detail {

struct Label {
  double cost = std::numeric_limits<double>::infinity();
  int hops = std::numeric_limits<int>::max();

  bool reached() const { return cost != std::numeric_limits<double>::infinity(); }
  friend bool operator<(const Label& a, const Label& b) {
    return a.cost < b.cost || (a.cost == b.cost && a.hops < b.hops);
  }
  friend bool operator==(const Label&, const Label&) = default;
};

// Dijkstra over reversed arcs. `for_each_in(v, f)` must call
// f(edge_id, from_vertex, weight) for every admissible arc ending at v.
template <class ForEachIn>
std::vector<Label> backward_labels(std::size_t num_vertices, std::int32_t goal, ForEachIn&& for_each_in) {
  std::vector<Label> label(num_vertices);
  using Item = std::pair<Label, std::int32_t>;
  auto later = [](const Item& a, const Item& b) {
    if (b.first < a.first) return true;
    if (a.first < b.first) return false;
    return a.second > b.second;
  };
  std::priority_queue<Item, std::vector<Item>, decltype(later)> open(later);
  label[static_cast<std::size_t>(goal)] = Label{0.0, 0};
  open.push({label[static_cast<std::size_t>(goal)], goal});
  while (!open.empty()) {
    auto [cur, v] = open.top();
    open.pop();
    if (!(cur == label[static_cast<std::size_t>(v)])) continue;
    for_each_in(v, [&](std::int32_t /*edge*/, std::int32_t from, double weight) {
      Label cand{cur.cost + weight, cur.hops + 1};
      auto& slot = label[static_cast<std::size_t>(from)];
      if (cand < slot) {
        slot = cand;
        open.push({cand, from});
      }
    });
  }
  return label;
}

// Greedy forward walk along tight arcs, choosing the smallest edge id at
// every step. `for_each_out(v, f)` calls f(edge_id, to_vertex, weight) for
// admissible arcs leaving v. Returns nullopt when start cannot reach goal.
template <class ForEachOut>
std::optional<std::vector<std::int32_t>> extract_canonical(const std::vector<Label>& label,
                                                           std::int32_t start, std::int32_t goal,
                                                           ForEachOut&& for_each_out) {
  if (!label[static_cast<std::size_t>(start)].reached()) return std::nullopt;
  std::vector<std::int32_t> edges;
  std::int32_t v = start;
  while (v != goal) {
    const Label& here = label[static_cast<std::size_t>(v)];
    std::int32_t best_edge = -1;
    std::int32_t best_to = -1;
    for_each_out(v, [&](std::int32_t edge, std::int32_t to, double weight) {
      const Label& there = label[static_cast<std::size_t>(to)];
      if (!there.reached()) return;
      if (there.hops + 1 != here.hops || there.cost + weight != here.cost) return;
      if (best_edge < 0 || edge < best_edge) {
        best_edge = edge;
        best_to = to;
      }
    });
    // A tight arc always exists for a reached vertex; guard anyway.
    if (best_edge < 0) return std::nullopt;
    edges.push_back(best_edge);
    v = best_to;
  }
  return edges;
}

}  // namespace tandem::detail
