#include "tandem/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

namespace tandem::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<EdgeId> shortest_or_throw(const RoadGraph& g, CostKind kind, const AgentSpec& a) {
  auto path = shortest_path(g, kind, a.start, a.goal);
  if (!path) throw mapf::AgentUnreachable(a.id, "agent " + std::to_string(a.id) + " cannot reach its goal");
  return std::move(path->edges);
}

stage2::DroneSolution all_flying(std::vector<EdgeId> edges) {
  stage2::DroneSolution sol;
  sol.assignment.assign(edges.size(), stage2::kFlying);
  sol.positions.assign(edges.size(), -1);
  sol.road_path = std::move(edges);
  return sol;
}

void finalize(const ProblemSpec& spec, GlobalSolution& sol) {
  sol.cost = total_cost(*spec.graph, sol);
  auto report = validate_solution(spec, sol);
  if (!report.pass()) {
    std::ostringstream msg;
    msg << "internal error: " << sol.meta.approach << " produced an invalid solution\n";
    write_report(msg, report);
    throw std::logic_error(msg.str());
  }
}

// Stage 2 over fixed truck paths, reroute, cost and validation.
GlobalSolution finish_with_stage2(const ProblemSpec& spec, std::vector<std::vector<EdgeId>> truck_paths,
                                  mapf::SolverKind solver, Clock::time_point t0, GlobalSolution sol) {
  const auto& g = *spec.graph;
  auto t2 = Clock::now();
  auto limits = spec.limits;
  limits.wall_timeout_s = std::max(0.0, spec.limits.wall_timeout_s - seconds_since(t0));
  auto cg = stage2::build_composite(g, spec.trucks, truck_paths, spec.capacity);
  auto s2 = stage2::solve_stage2(cg, spec.drones, solver, limits);
  if (!s2.solution.ok()) throw StageFailed(2, s2.solution.status, s2.solution.failed_agent);
  sol.meta.stage2_s = seconds_since(t2);
  sol.meta.conflicts_resolved += s2.solution.stats.conflicts_resolved;

  auto tp = Clock::now();
  sol.drone_solutions = std::move(s2.drones);
  sol.truck_paths = reroute_unused_trucks(g, spec.trucks, truck_paths, sol.drone_solutions, &sol.meta.rerouted_trucks);
  finalize(spec, sol);
  sol.meta.post_s = seconds_since(tp);
  sol.meta.wall_s = seconds_since(t0);
  return sol;
}

}  // namespace

StageFailed::StageFailed(int stage, mapf::SolveStatus cause, std::optional<AgentId> agent)
    : std::runtime_error("stage " + std::to_string(stage) + " failed: " + mapf::to_string(cause) +
                         (agent ? " (agent " + std::to_string(*agent) + ")" : std::string())),
      stage_(stage),
      cause_(cause),
      agent_(agent) {}

void check_spec(const ProblemSpec& spec) {
  if (!spec.graph) throw std::invalid_argument("problem has no road graph");
  if (spec.capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  if (spec.max_hops < 1) throw std::invalid_argument("K must be >= 1");
  std::set<AgentId> ids;
  for (const auto* group : {&spec.trucks, &spec.drones}) {
    for (const auto& a : *group) {
      if (!ids.insert(a.id).second) throw std::invalid_argument("duplicate agent id " + std::to_string(a.id));
      if (a.id < 0) throw std::invalid_argument("agent ids must be nonnegative");
      if (!spec.graph->valid_node(a.start) || !spec.graph->valid_node(a.goal)) {
        throw std::invalid_argument("agent " + std::to_string(a.id) + " has an endpoint outside the graph");
      }
    }
  }
}

GlobalSolution solve_direct(const ProblemSpec& spec) {
  check_spec(spec);
  auto t0 = Clock::now();
  const auto& g = *spec.graph;
  GlobalSolution sol;
  sol.trucks = spec.trucks;
  sol.drones = spec.drones;
  sol.meta.approach = "direct";
  sol.meta.capacity = spec.capacity;
  for (const auto& t : spec.trucks) sol.truck_paths.push_back(shortest_or_throw(g, CostKind::Truck, t));
  for (const auto& d : spec.drones) sol.drone_solutions.push_back(all_flying(shortest_or_throw(g, CostKind::Drone, d)));
  finalize(spec, sol);
  sol.meta.wall_s = seconds_since(t0);
  return sol;
}

GlobalSolution solve(const ProblemSpec& spec) {
  check_spec(spec);
  auto t0 = Clock::now();
  const auto& g = *spec.graph;
  GlobalSolution sol;
  sol.trucks = spec.trucks;
  sol.drones = spec.drones;
  sol.meta.approach = "two-stage";
  sol.meta.stage1_solver = mapf::to_string(spec.stage1_solver);
  sol.meta.stage2_solver = mapf::to_string(spec.stage2_solver);
  sol.meta.capacity = spec.capacity;

  auto nominals = stage1::nominal_paths(g, spec.drones);
  auto tg = stage1::build_truck_graph(g, spec.drones, nominals, spec.max_hops, spec.discount);
  auto s1 = stage1::solve_stage1(tg, spec.trucks, spec.stage1_solver, spec.limits);
  if (!s1.solution.ok()) throw StageFailed(1, s1.solution.status, s1.solution.failed_agent);
  sol.meta.stage1_s = seconds_since(t0);
  sol.meta.conflicts_resolved = s1.solution.stats.conflicts_resolved;

  auto out = finish_with_stage2(spec, std::move(s1.road_paths), spec.stage2_solver, t0, std::move(sol));
  if (spec.fallback_to_direct) {
    auto direct = solve_direct(spec);
    if (out.cost.grand_total > direct.cost.grand_total * (1.0 + 1e-12)) {
      direct.meta = out.meta;
      direct.meta.fell_back_to_direct = true;
      direct.meta.rerouted_trucks.clear();
      direct.meta.wall_s = seconds_since(t0);
      return direct;
    }
  }
  return out;
}

GlobalSolution solve_dpp(const ProblemSpec& spec) {
  check_spec(spec);
  auto t0 = Clock::now();
  const auto& g = *spec.graph;
  GlobalSolution sol;
  sol.trucks = spec.trucks;
  sol.drones = spec.drones;
  sol.meta.approach = "dpp";
  sol.meta.stage1_solver = "direct";
  sol.meta.stage2_solver = "pp";
  sol.meta.capacity = spec.capacity;
  std::vector<std::vector<EdgeId>> truck_paths;
  for (const auto& t : spec.trucks) truck_paths.push_back(shortest_or_throw(g, CostKind::Truck, t));
  sol.meta.stage1_s = seconds_since(t0);
  return finish_with_stage2(spec, std::move(truck_paths), mapf::SolverKind::Pp, t0, std::move(sol));
}

std::vector<std::vector<EdgeId>> reroute_unused_trucks(const RoadGraph& g, std::span<const AgentSpec> trucks,
                                                       std::span<const std::vector<EdgeId>> truck_paths,
                                                       std::span<const stage2::DroneSolution> drones,
                                                       std::vector<AgentId>* rerouted) {
  std::set<AgentId> used;
  for (const auto& d : drones) {
    for (AgentId a : d.assignment) {
      if (a != stage2::kFlying) used.insert(a);
    }
  }
  std::vector<std::vector<EdgeId>> out(truck_paths.begin(), truck_paths.end());
  for (std::size_t i = 0; i < trucks.size(); ++i) {
    if (used.count(trucks[i].id)) continue;
    auto shortest = shortest_or_throw(g, CostKind::Truck, trucks[i]);
    if (shortest != out[i]) {
      out[i] = std::move(shortest);
      if (rerouted) rerouted->push_back(trucks[i].id);
    }
  }
  return out;
}

CostBreakdown total_cost(const RoadGraph& g, const GlobalSolution& sol) {
  CostBreakdown c;
  for (const auto& p : sol.truck_paths) c.truck_total += path_cost(g, CostKind::Truck, p);
  for (const auto& d : sol.drone_solutions) c.drone_flying_total += stage2::flying_cost(g, d);
  c.grand_total = c.truck_total + c.drone_flying_total;
  return c;
}

std::vector<long> departure_times(std::span<const int> edge_times) {
  std::vector<long> tau{0};
  for (int t : edge_times) tau.push_back(tau.back() + t);
  return tau;
}

std::vector<long> departure_times(const RoadGraph& g, std::span<const EdgeId> path, CostKind kind) {
  std::vector<int> times;
  for (EdgeId e : path) times.push_back(kind == CostKind::Truck ? g.edge(e).truck_time : g.edge(e).drone_time);
  return departure_times(times);
}

}  // namespace tandem::pipeline
