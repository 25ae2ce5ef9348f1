#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "tandem/detail/canonical_search.hpp"
#include "tandem/mapf.hpp"
#include "low_level.hpp"

namespace tandem::mapf {

VertexId SearchGraph::add_vertex() {
  out_.emplace_back();
  in_.emplace_back();
  return static_cast<VertexId>(out_.size() - 1);
}

InstanceId SearchGraph::add_instance(VertexId from, VertexId to, double weight, int capacity) {
  if (!valid_vertex(from) || !valid_vertex(to)) throw std::out_of_range("instance endpoint out of range");
  if (!(weight >= 0.0)) throw std::invalid_argument("instance weight must be nonnegative");
  if (capacity < 1) throw std::invalid_argument("instance capacity must be positive");
  auto id = static_cast<InstanceId>(instances_.size());
  instances_.push_back({from, to, weight, capacity});
  out_[static_cast<std::size_t>(from)].push_back(id);
  in_[static_cast<std::size_t>(to)].push_back(id);
  return id;
}

std::vector<double> SearchGraph::distances_to(VertexId goal) const {
  auto labels = detail::backward_labels(num_vertices(), goal, [&](VertexId v, auto&& f) {
    for (InstanceId e : in(v)) f(e, instance(e).from, instance(e).weight);
  });
  std::vector<double> out(labels.size());
  std::transform(labels.begin(), labels.end(), out.begin(), [](const detail::Label& l) { return l.cost; });
  return out;
}

bool ConstraintSet::forbidden(AgentId agent, InstanceId instance) const {
  auto it = forbidden_.find(agent);
  return it != forbidden_.end() && it->second.count(instance) > 0;
}

const std::set<InstanceId>& ConstraintSet::for_agent(AgentId agent) const {
  static const std::set<InstanceId> empty;
  auto it = forbidden_.find(agent);
  return it == forbidden_.end() ? empty : it->second;
}

std::size_t ConstraintSet::size() const {
  std::size_t n = 0;
  for (const auto& [agent, set] : forbidden_) n += set.size();
  return n;
}

namespace {

void check_agent(const SearchGraph& sg, const AgentSpec& agent) {
  if (!sg.valid_vertex(agent.start) || !sg.valid_vertex(agent.goal)) {
    throw std::out_of_range("agent " + std::to_string(agent.id) + " endpoint is not in the search graph");
  }
}

std::vector<char> forbidden_mask(const SearchGraph& sg, const ConstraintSet& constraints, AgentId agent) {
  std::vector<char> mask(sg.num_instances(), 0);
  for (InstanceId e : constraints.for_agent(agent)) {
    if (e >= 0 && static_cast<std::size_t>(e) < mask.size()) mask[static_cast<std::size_t>(e)] = 1;
  }
  return mask;
}

std::vector<detail::Label> constrained_labels(const SearchGraph& sg, VertexId goal, const std::vector<char>& mask) {
  return detail::backward_labels(sg.num_vertices(), goal, [&](VertexId v, auto&& f) {
    for (InstanceId e : sg.in(v)) {
      if (!mask[static_cast<std::size_t>(e)]) f(e, sg.instance(e).from, sg.instance(e).weight);
    }
  });
}

std::optional<Path> canonical_path(const SearchGraph& sg, const AgentSpec& agent,
                                   const std::vector<detail::Label>& labels, const std::vector<char>& mask) {
  auto edges = detail::extract_canonical(labels, agent.start, agent.goal, [&](VertexId v, auto&& f) {
    for (InstanceId e : sg.out(v)) {
      if (!mask[static_cast<std::size_t>(e)]) f(e, sg.instance(e).to, sg.instance(e).weight);
    }
  });
  if (!edges) return std::nullopt;
  return Path{std::move(*edges), labels[static_cast<std::size_t>(agent.start)].cost};
}

}  // namespace

std::optional<Path> constrained_shortest_path(const SearchGraph& sg, const AgentSpec& agent,
                                              const ConstraintSet& constraints) {
  check_agent(sg, agent);
  auto mask = forbidden_mask(sg, constraints, agent.id);
  auto labels = constrained_labels(sg, agent.goal, mask);
  return canonical_path(sg, agent, labels, mask);
}

// The focal band is searched exactly over (vertex, conflict budget) states:
// label(v, r) is the best (cost, hops) from v to the goal using at most r
// conflicts. The budget never needs to exceed the conflicts on the optimal
// path, which is itself inside the band.
std::optional<internal::FocalResult> internal::focal_search(const SearchGraph& sg, const AgentSpec& agent,
                                                       const ConstraintSet& constraints, double w,
                                                       const ConflictCount& conflict_count) {
  if (!(w >= 1.0)) throw std::invalid_argument("focal_path: w must be >= 1");
  check_agent(sg, agent);
  auto mask = forbidden_mask(sg, constraints, agent.id);
  auto labels = constrained_labels(sg, agent.goal, mask);
  auto optimal = canonical_path(sg, agent, labels, mask);
  if (!optimal) return std::nullopt;
  const double optimal_cost = optimal->cost;

  std::vector<int> cc(sg.num_instances(), 0);
  for (std::size_t e = 0; e < cc.size(); ++e) {
    if (!mask[e]) cc[e] = std::max(0, conflict_count(static_cast<InstanceId>(e)));
  }
  int budget = 0;
  for (InstanceId e : optimal->instances) budget += cc[static_cast<std::size_t>(e)];
  if (budget == 0) return internal::FocalResult{std::move(*optimal), optimal_cost};

  const double bound = w * optimal->cost * (1.0 + 1e-12) + 1e-12;

  // Forward costs from the start prune states that cannot lie on an in-band path.
  auto forward = detail::backward_labels(sg.num_vertices(), agent.start, [&](VertexId v, auto&& f) {
    for (InstanceId e : sg.out(v)) {
      if (!mask[static_cast<std::size_t>(e)]) f(e, sg.instance(e).to, sg.instance(e).weight);
    }
  });

  const std::size_t layers = static_cast<std::size_t>(budget) + 1;
  auto slot = [&](VertexId v, int r) { return static_cast<std::size_t>(v) * layers + static_cast<std::size_t>(r); };
  std::vector<detail::Label> label(sg.num_vertices() * layers);

  struct Item {
    detail::Label key;
    VertexId v;
    int r;
  };
  auto later = [](const Item& a, const Item& b) {
    if (b.key < a.key) return true;
    if (a.key < b.key) return false;
    return std::tie(a.v, a.r) > std::tie(b.v, b.r);
  };
  std::priority_queue<Item, std::vector<Item>, decltype(later)> open(later);
  for (int r = 0; r <= budget; ++r) {
    label[slot(agent.goal, r)] = detail::Label{0.0, 0};
    open.push({detail::Label{0.0, 0}, agent.goal, r});
  }
  while (!open.empty()) {
    Item cur = open.top();
    open.pop();
    if (!(cur.key == label[slot(cur.v, cur.r)])) continue;
    for (InstanceId e : sg.in(cur.v)) {
      if (mask[static_cast<std::size_t>(e)]) continue;
      int r = cur.r + cc[static_cast<std::size_t>(e)];
      if (r > budget) continue;
      const auto& inst = sg.instance(e);
      detail::Label cand{cur.key.cost + inst.weight, cur.key.hops + 1};
      const auto& fwd = forward[static_cast<std::size_t>(inst.from)];
      if (!fwd.reached() || fwd.cost + cand.cost > bound) continue;
      auto& dst = label[slot(inst.from, r)];
      if (cand < dst) {
        dst = cand;
        open.push({cand, inst.from, r});
      }
    }
  }

  int r = 0;
  while (r <= budget && !(label[slot(agent.start, r)].reached() && label[slot(agent.start, r)].cost <= bound)) ++r;
  if (r > budget) return internal::FocalResult{std::move(*optimal), optimal_cost};  // unreachable in exact arithmetic

  Path path;
  path.cost = label[slot(agent.start, r)].cost;
  VertexId v = agent.start;
  while (v != agent.goal || label[slot(v, r)].hops != 0) {
    const auto& here = label[slot(v, r)];
    InstanceId best = -1;
    int best_r = 0;
    for (InstanceId e : sg.out(v)) {
      if (mask[static_cast<std::size_t>(e)]) continue;
      int rest = r - cc[static_cast<std::size_t>(e)];
      if (rest < 0) continue;
      const auto& inst = sg.instance(e);
      const auto& there = label[slot(inst.to, rest)];
      if (!there.reached() || there.hops + 1 != here.hops || there.cost + inst.weight != here.cost) continue;
      if (best < 0 || e < best) {
        best = e;
        best_r = rest;
      }
    }
    if (best < 0) return internal::FocalResult{std::move(*optimal), optimal_cost};  // unreachable in exact arithmetic
    path.instances.push_back(best);
    v = sg.instance(best).to;
    r = best_r;
  }
  return internal::FocalResult{std::move(path), optimal_cost};
}

std::optional<Path> focal_path(const SearchGraph& sg, const AgentSpec& agent, const ConstraintSet& constraints,
                               double w, const ConflictCount& conflict_count) {
  auto found = internal::focal_search(sg, agent, constraints, w, conflict_count);
  if (!found) return std::nullopt;
  return std::move(found->path);
}

double sum_of_costs(std::span<const Path> paths) {
  double total = 0.0;
  for (const auto& p : paths) total += p.cost;
  return total;
}

}  // namespace tandem::mapf
