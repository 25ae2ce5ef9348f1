#include "tandem/stage2.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tandem::stage2 {

CompositeGraph build_composite(const RoadGraph& g, std::span<const AgentSpec> trucks,
                               std::span<const std::vector<EdgeId>> truck_paths, int capacity) {
  if (trucks.size() != truck_paths.size()) throw std::invalid_argument("build_composite: one path per truck");
  if (capacity < 1) throw std::invalid_argument("build_composite: capacity must be >= 1");
  CompositeGraph cg;
  cg.road_ = &g;
  cg.capacity_ = capacity;
  cg.trucks_.assign(trucks.begin(), trucks.end());
  cg.truck_paths_.assign(truck_paths.begin(), truck_paths.end());
  cg.graph_ = mapf::SearchGraph(g.num_nodes());
  for (const auto& e : g.edges()) {
    cg.graph_.add_instance(e.origin, e.dest, e.drone_cost);
    cg.info_.push_back({InstanceKind::Road, e.id, kFlying, -1});
  }

  for (std::size_t t = 0; t < trucks.size(); ++t) {
    const auto& path = truck_paths[t];
    const AgentId truck = trucks[t].id;
    auto nodes = path_nodes(g, trucks[t].start, path);
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      if (g.edge(path[k]).origin != nodes[k]) throw std::invalid_argument("build_composite: truck path is not connected");
    }
    std::vector<mapf::VertexId> stop_vertex;
    for (std::size_t p = 0; p < nodes.size(); ++p) {
      auto v = cg.graph_.add_vertex();
      stop_vertex.push_back(v);
      cg.stops_.push_back({truck, static_cast<int>(p), nodes[p], v});
    }
    for (std::size_t p = 0; p < path.size(); ++p) {
      cg.graph_.add_instance(stop_vertex[p], stop_vertex[p + 1], 0.0, capacity);
      cg.info_.push_back({InstanceKind::Transit, path[p], truck, static_cast<int>(p)});
      ++cg.num_transit_;
    }
    for (std::size_t p = 0; p < nodes.size(); ++p) {
      cg.graph_.add_instance(nodes[p], stop_vertex[p], 0.0);
      cg.info_.push_back({InstanceKind::Board, -1, truck, static_cast<int>(p)});
    }
    for (std::size_t p = 0; p < nodes.size(); ++p) {
      cg.graph_.add_instance(stop_vertex[p], nodes[p], 0.0);
      cg.info_.push_back({InstanceKind::Alight, -1, truck, static_cast<int>(p)});
    }
  }
  return cg;
}

std::vector<AgentId> drone_order(const RoadGraph& g, std::span<const AgentSpec> drones) {
  std::vector<std::pair<double, AgentId>> keyed;
  for (const auto& d : drones) {
    auto path = shortest_path(g, CostKind::Drone, d.start, d.goal);
    if (!path) throw mapf::AgentUnreachable(d.id, "drone " + std::to_string(d.id) + " cannot reach its goal");
    keyed.emplace_back(path->cost, d.id);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<AgentId> order;
  for (const auto& [cost, id] : keyed) order.push_back(id);
  return order;
}

DroneSolution extract_assignments(const CompositeGraph& cg, const mapf::Path& path) {
  DroneSolution sol;
  for (auto inst : path.instances) {
    const auto& info = cg.info(inst);
    switch (info.kind) {
      case InstanceKind::Road:
        sol.road_path.push_back(info.base_edge);
        sol.assignment.push_back(kFlying);
        sol.positions.push_back(-1);
        break;
      case InstanceKind::Transit:
        sol.road_path.push_back(info.base_edge);
        sol.assignment.push_back(info.truck);
        sol.positions.push_back(info.position);
        break;
      case InstanceKind::Board:
      case InstanceKind::Alight:
        break;
    }
  }
  return sol;
}

Stage2Result solve_stage2(const CompositeGraph& cg, std::span<const AgentSpec> drones, mapf::SolverKind solver,
                          const mapf::SolverLimits& limits) {
  std::vector<AgentId> ordering;
  if (solver == mapf::SolverKind::Pp) ordering = drone_order(cg.road(), drones);
  Stage2Result out;
  out.solution = mapf::solve(solver, cg.graph(), drones, ordering, limits);
  if (!out.solution.ok()) return out;
  for (const auto& path : out.solution.paths) out.drones.push_back(extract_assignments(cg, path));
  return out;
}

double flying_cost(const RoadGraph& g, const DroneSolution& sol) {
  double total = 0.0;
  for (std::size_t j = 0; j < sol.road_path.size(); ++j) {
    if (j >= sol.assignment.size() || sol.assignment[j] == kFlying) total += g.edge(sol.road_path[j]).drone_cost;
  }
  return total;
}

void write_drone_solution(std::ostream& out, const DroneSolution& sol) {
  out << "edges";
  for (EdgeId e : sol.road_path) out << ' ' << e;
  out << "\nlabels";
  for (AgentId a : sol.assignment) {
    if (a == kFlying) out << " -";
    else out << ' ' << a;
  }
  out << "\npositions";
  for (int p : sol.positions) {
    if (p < 0) out << " -";
    else out << ' ' << p;
  }
  out << '\n';
}

}  // namespace tandem::stage2
