#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <string>

#include "tandem/pipeline.hpp"

namespace tandem::pipeline {

namespace {

std::string who(const char* kind, AgentId id) { return std::string(kind) + " " + std::to_string(id); }

bool valid_edge(const RoadGraph& g, EdgeId e) { return e >= 0 && static_cast<std::size_t>(e) < g.num_edges(); }

void check_continuity(const RoadGraph& g, const char* kind, AgentId id, const std::vector<EdgeId>& path,
                      CheckResult& out) {
  for (std::size_t j = 0; j < path.size(); ++j) {
    if (!valid_edge(g, path[j])) {
      out.failures.push_back(who(kind, id) + ": edge " + std::to_string(path[j]) + " at step " + std::to_string(j) +
                             " does not exist");
      return;
    }
    if (j > 0 && valid_edge(g, path[j - 1]) && g.edge(path[j - 1]).dest != g.edge(path[j]).origin) {
      out.failures.push_back(who(kind, id) + ": break between steps " + std::to_string(j - 1) + " and " +
                             std::to_string(j));
    }
  }
}

void check_endpoints(const RoadGraph& g, const char* kind, const AgentSpec& a, const std::vector<EdgeId>& path,
                     CheckResult& out) {
  if (path.empty()) {
    if (a.start != a.goal) out.failures.push_back(who(kind, a.id) + ": empty path but start != goal");
    return;
  }
  if (valid_edge(g, path.front()) && g.edge(path.front()).origin != a.start) {
    out.failures.push_back(who(kind, a.id) + ": path does not leave from its start");
  }
  if (valid_edge(g, path.back()) && g.edge(path.back()).dest != a.goal) {
    out.failures.push_back(who(kind, a.id) + ": path does not end at its goal");
  }
}

bool close(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)}); }

}  // namespace

bool ValidationReport::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

const CheckResult& ValidationReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no validation check named " + name);
}

ValidationReport validate_solution(const ProblemSpec& spec, const GlobalSolution& sol) {
  const auto& g = *spec.graph;
  CheckResult continuity{kCheckContinuity, true, {}};
  CheckResult endpoints{kCheckEndpoints, true, {}};
  CheckResult membership{kCheckAssignment, true, {}};
  CheckResult capacity{kCheckCapacity, true, {}};
  CheckResult cost{kCheckCost, true, {}};

  if (sol.truck_paths.size() != sol.trucks.size() || sol.drone_solutions.size() != sol.drones.size()) {
    endpoints.failures.push_back("agent list and path list sizes differ");
  }
  std::map<AgentId, const std::vector<EdgeId>*> truck_path;
  for (std::size_t i = 0; i < sol.trucks.size() && i < sol.truck_paths.size(); ++i) {
    truck_path[sol.trucks[i].id] = &sol.truck_paths[i];
    check_continuity(g, "truck", sol.trucks[i].id, sol.truck_paths[i], continuity);
    check_endpoints(g, "truck", sol.trucks[i], sol.truck_paths[i], endpoints);
  }

  // (truck, position) -> riding drones
  std::map<std::pair<AgentId, int>, std::set<AgentId>> occupancy;
  for (std::size_t i = 0; i < sol.drones.size() && i < sol.drone_solutions.size(); ++i) {
    const auto& drone = sol.drones[i];
    const auto& ds = sol.drone_solutions[i];
    check_continuity(g, "drone", drone.id, ds.road_path, continuity);
    check_endpoints(g, "drone", drone, ds.road_path, endpoints);

    if (ds.assignment.size() != ds.road_path.size()) {
      membership.failures.push_back(who("drone", drone.id) + ": assignment length differs from path length");
      continue;
    }
    const bool have_positions = ds.positions.size() == ds.road_path.size();
    std::map<AgentId, int> last_position;
    for (std::size_t j = 0; j < ds.road_path.size(); ++j) {
      AgentId truck = ds.assignment[j];
      if (truck == stage2::kFlying) continue;
      auto it = truck_path.find(truck);
      if (it == truck_path.end()) {
        membership.failures.push_back(who("drone", drone.id) + ": step " + std::to_string(j) + " rides unknown truck " +
                                      std::to_string(truck));
        continue;
      }
      const auto& tp = *it->second;
      auto prev = last_position.find(truck);
      int lower = prev == last_position.end() ? -1 : prev->second;
      int pos = -1;
      if (have_positions) {
        pos = ds.positions[j];
      } else {
        for (int p = lower + 1; p < static_cast<int>(tp.size()); ++p) {
          if (tp[static_cast<std::size_t>(p)] == ds.road_path[j]) {
            pos = p;
            break;
          }
        }
      }
      if (pos < 0 || pos >= static_cast<int>(tp.size()) || tp[static_cast<std::size_t>(pos)] != ds.road_path[j]) {
        membership.failures.push_back(who("drone", drone.id) + ": step " + std::to_string(j) + " labeled truck " +
                                      std::to_string(truck) + " which does not traverse edge " +
                                      std::to_string(ds.road_path[j]) + " there");
        continue;
      }
      if (pos <= lower) {
        membership.failures.push_back(who("drone", drone.id) + ": rides truck " + std::to_string(truck) +
                                      " backwards at step " + std::to_string(j));
      }
      last_position[truck] = pos;
      occupancy[{truck, pos}].insert(drone.id);
    }
  }
  for (const auto& [slot, riders] : occupancy) {
    if (static_cast<long>(riders.size()) > spec.capacity) {
      capacity.failures.push_back("truck " + std::to_string(slot.first) + " edge position " +
                                  std::to_string(slot.second) + " carries " + std::to_string(riders.size()) +
                                  " drones, capacity " + std::to_string(spec.capacity));
    }
  }

  bool edges_known = true;
  for (const auto& p : sol.truck_paths) {
    for (EdgeId e : p) edges_known = edges_known && valid_edge(g, e);
  }
  for (const auto& d : sol.drone_solutions) {
    for (EdgeId e : d.road_path) edges_known = edges_known && valid_edge(g, e);
  }
  if (edges_known) {
    auto recomputed = total_cost(g, sol);
    if (!close(recomputed.truck_total, sol.cost.truck_total)) cost.failures.push_back("truck total mismatch");
    if (!close(recomputed.drone_flying_total, sol.cost.drone_flying_total)) cost.failures.push_back("drone total mismatch");
    if (!close(recomputed.grand_total, sol.cost.grand_total) ||
        !close(sol.cost.truck_total + sol.cost.drone_flying_total, sol.cost.grand_total)) {
      cost.failures.push_back("grand total mismatch");
    }
  } else {
    cost.failures.push_back("cost not recomputable: paths reference unknown edges");
  }

  ValidationReport report;
  for (auto* c : {&continuity, &endpoints, &membership, &capacity, &cost}) {
    c->pass = c->failures.empty();
    report.checks.push_back(std::move(*c));
  }
  return report;
}

void write_report(std::ostream& out, const ValidationReport& report) {
  for (const auto& c : report.checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
    for (const auto& f : c.failures) out << "  " << f << '\n';
  }
  out << (report.pass() ? "VALID" : "INVALID") << '\n';
}

}  // namespace tandem::pipeline
