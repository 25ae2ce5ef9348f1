#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tandem/mapf.hpp"
#include "tandem/roadnet.hpp"
#include "tandem/stage1.hpp"
#include "tandem/stage2.hpp"

namespace tandem::pipeline {

using mapf::AgentId;
using mapf::AgentSpec;

struct ProblemSpec {
  std::shared_ptr<const RoadGraph> graph;
  std::vector<AgentSpec> trucks;
  std::vector<AgentSpec> drones;
  int capacity = 5;
  int max_hops = 3;
  stage1::DiscountKind discount = stage1::DiscountKind::Tanh;
  mapf::SolverKind stage1_solver = mapf::SolverKind::Pp;
  mapf::SolverKind stage2_solver = mapf::SolverKind::Pp;
  mapf::SolverLimits limits;
  // Return the Direct plan when coordination ends up costlier than it.
  bool fallback_to_direct = true;
};

// Throws std::invalid_argument on duplicate ids, bad endpoints, C < 1 or K < 1.
void check_spec(const ProblemSpec& spec);

struct CostBreakdown {
  double truck_total = 0.0;
  double drone_flying_total = 0.0;
  double grand_total = 0.0;
};

struct SolutionMeta {
  std::string approach;  // direct | two-stage | dpp
  std::string stage1_solver = "-";
  std::string stage2_solver = "-";
  int capacity = 0;
  double wall_s = 0.0;
  double stage1_s = 0.0;
  double stage2_s = 0.0;
  double post_s = 0.0;
  long conflicts_resolved = 0;
  std::vector<AgentId> rerouted_trucks;
  bool fell_back_to_direct = false;
};

struct GlobalSolution {
  std::vector<AgentSpec> trucks;
  std::vector<AgentSpec> drones;
  std::vector<std::vector<EdgeId>> truck_paths;  // parallel to trucks
  std::vector<stage2::DroneSolution> drone_solutions;  // parallel to drones
  CostBreakdown cost;
  SolutionMeta meta;
};

class StageFailed : public std::runtime_error {
 public:
  StageFailed(int stage, mapf::SolveStatus cause, std::optional<AgentId> agent);
  int stage() const { return stage_; }
  mapf::SolveStatus cause() const { return cause_; }
  std::optional<AgentId> agent() const { return agent_; }

 private:
  int stage_;
  mapf::SolveStatus cause_;
  std::optional<AgentId> agent_;
};

// Independent shortest paths, every drone flying. Throws mapf::AgentUnreachable.
GlobalSolution solve_direct(const ProblemSpec& spec);

// Stage 1 truck MAPF, Stage 2 drone MAPF, then reroute_unused_trucks and
// validation. Throws StageFailed.
GlobalSolution solve(const ProblemSpec& spec);

// Direct truck paths followed by a PP Stage 2.
GlobalSolution solve_dpp(const ProblemSpec& spec);

// Trucks that carry no drone on any edge go back to their shortest paths.
std::vector<std::vector<EdgeId>> reroute_unused_trucks(const RoadGraph& g, std::span<const AgentSpec> trucks,
                                                       std::span<const std::vector<EdgeId>> truck_paths,
                                                       std::span<const stage2::DroneSolution> drones,
                                                       std::vector<AgentId>* rerouted = nullptr);

CostBreakdown total_cost(const RoadGraph& g, const GlobalSolution& sol);

struct CheckResult {
  std::string name;
  bool pass = true;
  std::vector<std::string> failures;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool pass() const;
  const CheckResult& check(const std::string& name) const;
};

// Check names, in report order.
inline constexpr const char* kCheckContinuity = "continuity";
inline constexpr const char* kCheckEndpoints = "endpoints";
inline constexpr const char* kCheckAssignment = "assignment_membership";
inline constexpr const char* kCheckCapacity = "capacity";
inline constexpr const char* kCheckCost = "cost";

ValidationReport validate_solution(const ProblemSpec& spec, const GlobalSolution& sol);
void write_report(std::ostream& out, const ValidationReport& report);

// tau_0 = 0 and tau_j = t(e_j) + tau_{j-1}; one entry per path node.
std::vector<long> departure_times(std::span<const int> edge_times);
std::vector<long> departure_times(const RoadGraph& g, std::span<const EdgeId> path, CostKind kind);

}  // namespace tandem::pipeline
