#include "tandem/mapf.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "low_level.hpp"

namespace tandem::mapf {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Ok: return "ok";
    case SolveStatus::Unsolvable: return "unsolvable";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::ConflictOverflow: return "conflict_overflow";
  }
  return "unknown";
}

namespace {

// Distinct agents per capacity-limited instance, in ascending instance order.
std::map<InstanceId, std::vector<AgentId>> limited_usage(const SearchGraph& sg, std::span<const AgentSpec> agents,
                                                         std::span<const Path> paths) {
  std::map<InstanceId, std::vector<AgentId>> users;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (InstanceId e : paths[i].instances) {
      if (!sg.instance(e).limited()) continue;
      auto& list = users[e];
      if (list.empty() || list.back() != agents[i].id) list.push_back(agents[i].id);
    }
  }
  for (auto& [e, list] : users) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return users;
}

class Clock {
 public:
  Clock() : start_(std::chrono::steady_clock::now()) {}
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void check_agents(std::span<const AgentSpec> agents) {
  std::vector<AgentId> ids;
  for (const auto& a : agents) ids.push_back(a.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw std::invalid_argument("duplicate agent id");
}

struct CtNode {
  ConstraintSet constraints;
  std::vector<Path> paths;
  std::vector<double> lower;  // per-agent optimal constrained cost
  double cost = 0.0;
  double lower_bound = 0.0;
  std::size_t num_conflicts = 0;
  long seq = 0;
};

// Shared CBS / ECBS high level. With focal disabled nodes are expanded in
// (cost, generation order); with focal enabled the node with the fewest
// conflicts whose cost lies within w times the smallest open lower bound is
// expanded.
class HighLevel {
 public:
  HighLevel(const SearchGraph& sg, std::span<const AgentSpec> agents, const SolverLimits& limits, bool focal)
      : sg_(sg), agents_(agents), limits_(limits), focal_(focal), w_(focal ? limits.w : 1.0) {
    if (!(w_ >= 1.0)) throw std::invalid_argument("suboptimality factor must be >= 1");
    for (std::size_t i = 0; i < agents.size(); ++i) index_[agents[i].id] = i;
  }

  Solution run() {
    check_agents(agents_);
    Solution out;
    auto root = std::make_unique<CtNode>();
    root->paths.resize(agents_.size());
    root->lower.resize(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (!replan(*root, i)) {
        out.status = SolveStatus::Unsolvable;
        out.failed_agent = agents_[i].id;
        return finish(out);
      }
    }
    push(std::move(root));

    while (!open_.empty()) {
      if (clock_.elapsed() > limits_.wall_timeout_s) {
        out.status = SolveStatus::Timeout;
        return finish(out);
      }
      auto node = pop();
      ++stats_.expansions;
      auto conflicts = detect_conflicts(sg_, agents_, node->paths);
      if (conflicts.empty()) {
        out.status = SolveStatus::Ok;
        out.paths = std::move(node->paths);
        out.cost = node->cost;
        return finish(out);
      }
      if (stats_.conflicts_resolved >= limits_.conflict_threshold) {
        out.status = SolveStatus::ConflictOverflow;
        return finish(out);
      }
      ++stats_.conflicts_resolved;
      const Conflict& conflict = conflicts.front();
      for (const auto& delta : branch(conflict)) {
        if (clock_.elapsed() > limits_.wall_timeout_s) {
          out.status = SolveStatus::Timeout;
          return finish(out);
        }
        auto child = std::make_unique<CtNode>(*node);
        bool feasible = true;
        for (const auto& [agent, instance] : delta) child->constraints.forbid(agent, instance);
        for (const auto& [agent, instance] : delta) {
          if (!replan(*child, index_.at(agent))) {
            feasible = false;
            break;
          }
        }
        if (feasible) push(std::move(child));
      }
    }
    out.status = SolveStatus::Unsolvable;
    return finish(out);
  }

 private:
  bool replan(CtNode& node, std::size_t i) {
    ++stats_.low_level_calls;
    const auto& agent = agents_[i];
    if (!focal_) {
      auto path = constrained_shortest_path(sg_, agent, node.constraints);
      if (!path) return false;
      node.lower[i] = path->cost;
      node.paths[i] = std::move(*path);
    } else {
      std::map<InstanceId, int> others;
      for (std::size_t j = 0; j < agents_.size(); ++j) {
        if (j == i) continue;
        std::vector<InstanceId> seen;
        for (InstanceId e : node.paths[j].instances) {
          if (sg_.instance(e).limited()) seen.push_back(e);
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (InstanceId e : seen) ++others[e];
      }
      auto count = [&](InstanceId e) {
        auto it = others.find(e);
        return it != others.end() && it->second >= sg_.instance(e).capacity ? 1 : 0;
      };
      auto found = internal::focal_search(sg_, agent, node.constraints, w_, count);
      if (!found) return false;
      node.lower[i] = found->optimal_cost;
      node.paths[i] = std::move(found->path);
    }
    node.cost = sum_of_costs(node.paths);
    node.lower_bound = std::accumulate(node.lower.begin(), node.lower.end(), 0.0);
    return true;
  }

  void push(std::unique_ptr<CtNode> node) {
    node->seq = next_seq_++;
    node->num_conflicts = focal_ ? detect_conflicts(sg_, agents_, node->paths).size() : 0;
    ++stats_.generated;
    open_.push_back(std::move(node));
  }

  std::unique_ptr<CtNode> pop() {
    std::size_t best = 0;
    if (!focal_) {
      for (std::size_t k = 1; k < open_.size(); ++k) {
        const auto& a = *open_[k];
        const auto& b = *open_[best];
        if (a.cost < b.cost || (a.cost == b.cost && a.seq < b.seq)) best = k;
      }
    } else {
      double min_lb = open_.front()->lower_bound;
      for (const auto& n : open_) min_lb = std::min(min_lb, n->lower_bound);
      const double band = w_ * min_lb * (1.0 + 1e-12) + 1e-12;
      bool found = false;
      for (std::size_t k = 0; k < open_.size(); ++k) {
        const auto& a = *open_[k];
        if (a.cost > band) continue;
        if (!found) {
          best = k;
          found = true;
          continue;
        }
        const auto& b = *open_[best];
        if (a.num_conflicts != b.num_conflicts) {
          if (a.num_conflicts < b.num_conflicts) best = k;
        } else if (a.cost != b.cost) {
          if (a.cost < b.cost) best = k;
        } else if (a.seq < b.seq) {
          best = k;
        }
      }
      if (!found) {
        // Numerically empty band: fall back to the best lower bound.
        for (std::size_t k = 1; k < open_.size(); ++k) {
          if (open_[k]->lower_bound < open_[best]->lower_bound) best = k;
        }
      }
      stats_.lower_bound = min_lb;
    }
    auto node = std::move(open_[best]);
    open_[best] = std::move(open_.back());
    open_.pop_back();
    return node;
  }

  Solution& finish(Solution& out) {
    stats_.wall_s = clock_.elapsed();
    out.stats = stats_;
    return out;
  }

  const SearchGraph& sg_;
  std::span<const AgentSpec> agents_;
  SolverLimits limits_;
  bool focal_;
  double w_;
  std::map<AgentId, std::size_t> index_;
  std::vector<std::unique_ptr<CtNode>> open_;
  long next_seq_ = 0;
  SolverStats stats_;
  Clock clock_;
};

}  // namespace

std::vector<Conflict> detect_conflicts(const SearchGraph& sg, std::span<const AgentSpec> agents,
                                       std::span<const Path> paths) {
  if (agents.size() != paths.size()) throw std::invalid_argument("detect_conflicts: agents/paths size mismatch");
  std::vector<Conflict> out;
  for (auto& [e, users] : limited_usage(sg, agents, paths)) {
    int cap = sg.instance(e).capacity;
    if (static_cast<long>(users.size()) > cap) out.push_back({e, std::move(users), cap});
  }
  return out;
}

std::vector<Conflict> detect_conflicts(const SearchGraph& sg, const std::map<AgentId, Path>& paths) {
  std::vector<AgentSpec> agents;
  std::vector<Path> list;
  for (const auto& [id, path] : paths) {
    agents.push_back({id, AgentKind::Truck, 0, 0});
    list.push_back(path);
  }
  return detect_conflicts(sg, agents, list);
}

std::vector<ConstraintDelta> branch(const Conflict& conflict) {
  const auto n = conflict.agents.size();
  const auto k = static_cast<std::size_t>(conflict.capacity);
  if (k < 1 || n <= k) throw std::invalid_argument("branch: conflict must exceed a positive capacity");
  std::vector<ConstraintDelta> children;
  // Enumerate survivor subsets in lexicographic order of agent positions.
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    ConstraintDelta delta;
    std::size_t p = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (p < k && pick[p] == a) {
        ++p;
        continue;
      }
      delta.emplace_back(conflict.agents[a], conflict.instance);
    }
    children.push_back(std::move(delta));
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return children;
}

Solution cbs(const SearchGraph& sg, std::span<const AgentSpec> agents, const SolverLimits& limits) {
  return HighLevel(sg, agents, limits, false).run();
}

Solution ecbs(const SearchGraph& sg, std::span<const AgentSpec> agents, const SolverLimits& limits) {
  return HighLevel(sg, agents, limits, true).run();
}

Solution pp(const SearchGraph& sg, std::span<const AgentSpec> agents, std::span<const AgentId> ordering,
            const SolverLimits& limits) {
  check_agents(agents);
  std::map<AgentId, std::size_t> index;
  for (std::size_t i = 0; i < agents.size(); ++i) index[agents[i].id] = i;
  {
    std::vector<AgentId> sorted(ordering.begin(), ordering.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<AgentId> ids;
    for (const auto& a : agents) ids.push_back(a.id);
    std::sort(ids.begin(), ids.end());
    if (sorted != ids) throw std::invalid_argument("pp: ordering is not a permutation of the agents");
  }

  Clock clock;
  Solution out;
  out.paths.resize(agents.size());
  std::map<InstanceId, int> remaining;
  std::set<InstanceId> exhausted;
  for (AgentId id : ordering) {
    if (clock.elapsed() > limits.wall_timeout_s) {
      out.status = SolveStatus::Timeout;
      out.stats.wall_s = clock.elapsed();
      return out;
    }
    ConstraintSet constraints;
    for (InstanceId e : exhausted) constraints.forbid(id, e);
    const std::size_t i = index.at(id);
    ++out.stats.low_level_calls;
    auto path = constrained_shortest_path(sg, agents[i], constraints);
    if (!path) {
      out.status = SolveStatus::Unsolvable;
      out.failed_agent = id;
      out.stats.wall_s = clock.elapsed();
      return out;
    }
    std::vector<InstanceId> used;
    for (InstanceId e : path->instances) {
      if (sg.instance(e).limited()) used.push_back(e);
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    for (InstanceId e : used) {
      auto [it, inserted] = remaining.try_emplace(e, sg.instance(e).capacity);
      if (--it->second <= 0) exhausted.insert(e);
    }
    out.paths[i] = std::move(*path);
  }
  out.status = SolveStatus::Ok;
  out.cost = sum_of_costs(out.paths);
  out.stats.wall_s = clock.elapsed();
  return out;
}

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Cbs: return "cbs";
    case SolverKind::Ecbs: return "ecbs";
    case SolverKind::Pp: return "pp";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "cbs") return SolverKind::Cbs;
  if (name == "ecbs") return SolverKind::Ecbs;
  if (name == "pp") return SolverKind::Pp;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

Solution solve(SolverKind kind, const SearchGraph& sg, std::span<const AgentSpec> agents,
               std::span<const AgentId> ordering, const SolverLimits& limits) {
  switch (kind) {
    case SolverKind::Cbs: return cbs(sg, agents, limits);
    case SolverKind::Ecbs: return ecbs(sg, agents, limits);
    case SolverKind::Pp: return pp(sg, agents, ordering, limits);
  }
  throw std::invalid_argument("unknown solver kind");
}

void write_solution(std::ostream& out, const SearchGraph& sg, std::span<const AgentSpec> agents,
                    std::span<const Path> paths) {
  char buf[64];
  for (std::size_t i = 0; i < agents.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", paths[i].cost);
    out << "agent " << agents[i].id << " cost " << buf << '\n';
    for (InstanceId e : paths[i].instances) {
      std::snprintf(buf, sizeof buf, "%.17g", sg.instance(e).weight);
      out << "  " << e << ' ' << buf << '\n';
    }
  }
}

}  // namespace tandem::mapf
