#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tandem/search_graph.hpp"

namespace tandem::mapf {

using AgentId = int;

enum class AgentKind { Truck, Drone };

struct AgentSpec {
  AgentId id = 0;
  AgentKind kind = AgentKind::Truck;
  VertexId start = 0;
  VertexId goal = 0;
};

class AgentUnreachable : public std::runtime_error {
 public:
  AgentUnreachable(AgentId agent, const std::string& what) : std::runtime_error(what), agent_(agent) {}
  AgentId agent() const { return agent_; }

 private:
  AgentId agent_;
};

struct Path {
  std::vector<InstanceId> instances;
  double cost = 0.0;

  friend bool operator==(const Path&, const Path&) = default;
};

// Per-agent forbidden instances. Only ever grows along a CBS branch or a PP
// run.
class ConstraintSet {
 public:
  void forbid(AgentId agent, InstanceId instance) { forbidden_[agent].insert(instance); }
  bool forbidden(AgentId agent, InstanceId instance) const;
  const std::set<InstanceId>& for_agent(AgentId agent) const;
  std::size_t size() const;

 private:
  std::map<AgentId, std::set<InstanceId>> forbidden_;
};

struct Conflict {
  InstanceId instance = 0;
  std::vector<AgentId> agents;  // ascending, size > capacity
  int capacity = 1;
};

// One child of a branch: (agent, instance) pairs to forbid.
using ConstraintDelta = std::vector<std::pair<AgentId, InstanceId>>;

struct SolverLimits {
  int conflict_threshold = 500;
  double wall_timeout_s = 600.0;
  double w = 1.3;
};

enum class SolveStatus { Ok, Unsolvable, Timeout, ConflictOverflow };

const char* to_string(SolveStatus status);

struct SolverStats {
  long expansions = 0;
  long generated = 0;
  long conflicts_resolved = 0;
  long low_level_calls = 0;
  double wall_s = 0.0;
  double lower_bound = 0.0;
};

struct Solution {
  SolveStatus status = SolveStatus::Unsolvable;
  std::vector<Path> paths;  // parallel to the agent list given to the solver
  double cost = 0.0;
  std::optional<AgentId> failed_agent;
  SolverStats stats;

  bool ok() const { return status == SolveStatus::Ok; }
};

using ConflictCount = std::function<int(InstanceId)>;

std::optional<Path> constrained_shortest_path(const SearchGraph& sg, const AgentSpec& agent,
                                              const ConstraintSet& constraints);

// Bounded-suboptimal search: cost <= w * optimal constrained cost, and among
// such paths the fewest summed conflicts, then least cost, then canonical.
std::optional<Path> focal_path(const SearchGraph& sg, const AgentSpec& agent,
                               const ConstraintSet& constraints, double w,
                               const ConflictCount& conflict_count);

// Over-capacity instances in ascending instance order.
std::vector<Conflict> detect_conflicts(const SearchGraph& sg, std::span<const AgentSpec> agents,
                                       std::span<const Path> paths);
std::vector<Conflict> detect_conflicts(const SearchGraph& sg, const std::map<AgentId, Path>& paths);

// One child per capacity-sized survivor subset; every other user of the
// instance is forbidden from it in that child.
std::vector<ConstraintDelta> branch(const Conflict& conflict);

Solution cbs(const SearchGraph& sg, std::span<const AgentSpec> agents, const SolverLimits& limits);
Solution ecbs(const SearchGraph& sg, std::span<const AgentSpec> agents, const SolverLimits& limits);
Solution pp(const SearchGraph& sg, std::span<const AgentSpec> agents, std::span<const AgentId> ordering,
            const SolverLimits& limits);

enum class SolverKind { Cbs, Ecbs, Pp };

const char* to_string(SolverKind kind);
SolverKind parse_solver_kind(std::string_view name);

// Dispatches to cbs / ecbs / pp. The ordering is only consulted by pp.
Solution solve(SolverKind kind, const SearchGraph& sg, std::span<const AgentSpec> agents,
               std::span<const AgentId> ordering, const SolverLimits& limits);

double sum_of_costs(std::span<const Path> paths);

// Stable text form: `agent <id> cost <c>` then `  <instance> <weight>` rows.
void write_solution(std::ostream& out, const SearchGraph& sg, std::span<const AgentSpec> agents,
                    std::span<const Path> paths);

}  // namespace tandem::mapf
