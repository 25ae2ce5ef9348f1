#include "tandem/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

namespace tandem::stage1 {

const char* to_string(DiscountKind kind) { return kind == DiscountKind::Tanh ? "tanh" : "sigmoid"; }

DiscountKind parse_discount_kind(std::string_view name) {
  if (name == "tanh") return DiscountKind::Tanh;
  if (name == "sigmoid") return DiscountKind::Sigmoid;
  throw std::invalid_argument("unknown discount '" + std::string(name) + "'");
}

double gamma(DiscountKind kind, int hop) {
  if (hop < 0) throw std::invalid_argument("gamma: hop must be nonnegative");
  const double k = static_cast<double>(hop);
  if (kind == DiscountKind::Tanh) return 0.5 * (1.0 + std::tanh(k));
  return 1.0 / (1.0 + std::exp(-k));
}

std::vector<RoadPath> nominal_paths(const RoadGraph& g, std::span<const AgentSpec> drones) {
  std::vector<RoadPath> out;
  out.reserve(drones.size());
  for (const auto& d : drones) {
    auto path = shortest_path(g, CostKind::Drone, d.start, d.goal);
    if (!path) throw mapf::AgentUnreachable(d.id, "drone " + std::to_string(d.id) + " cannot reach its goal");
    out.push_back(std::move(*path));
  }
  return out;
}

std::map<EdgeId, int> edge_hop_labels(const RoadGraph& g, NodeId start, std::span<const EdgeId> nominal,
                                      int max_hops) {
  if (max_hops < 0) throw std::invalid_argument("edge_hop_labels: max_hops must be nonnegative");
  std::set<NodeId> seeds;
  for (NodeId v : path_nodes(g, start, nominal)) seeds.insert(v);
  auto dist = hop_distances(g, seeds, max_hops);
  std::set<EdgeId> on_path(nominal.begin(), nominal.end());

  std::map<EdgeId, int> labels;
  for (const auto& e : g.edges()) {
    if (on_path.count(e.id)) {
      labels[e.id] = 0;
      continue;
    }
    auto o = dist.find(e.origin);
    auto d = dist.find(e.dest);
    if (o == dist.end() && d == dist.end()) continue;
    int nearest = std::min(o == dist.end() ? max_hops + 1 : o->second, d == dist.end() ? max_hops + 1 : d->second);
    int hop = std::max(1, nearest);
    if (hop <= max_hops) labels[e.id] = hop;
  }
  return labels;
}

EdgeId TruckGraph::base_edge(mapf::InstanceId instance) const {
  const auto num_base = static_cast<mapf::InstanceId>(road_->num_edges());
  if (instance < num_base) return instance;
  return copies_.at(static_cast<std::size_t>(instance - num_base)).base_edge;
}

const EdgeCopy* TruckGraph::copy(mapf::InstanceId instance) const {
  const auto num_base = static_cast<mapf::InstanceId>(road_->num_edges());
  if (instance < num_base) return nullptr;
  return &copies_.at(static_cast<std::size_t>(instance - num_base));
}

TruckGraph build_truck_graph(const RoadGraph& g, std::span<const AgentSpec> drones, std::span<const RoadPath> nominals,
                             int max_hops, DiscountKind discount) {
  if (drones.size() != nominals.size()) throw std::invalid_argument("build_truck_graph: one nominal path per drone");
  if (max_hops < 1) throw std::invalid_argument("build_truck_graph: K must be >= 1");
  TruckGraph tg;
  tg.road_ = &g;
  tg.graph_ = mapf::SearchGraph(g.num_nodes());
  for (const auto& e : g.edges()) tg.graph_.add_instance(e.origin, e.dest, e.truck_cost);
  for (std::size_t i = 0; i < drones.size(); ++i) {
    for (const auto& [edge, hop] : edge_hop_labels(g, drones[i].start, nominals[i].edges, max_hops)) {
      const auto& base = g.edge(edge);
      // A free edge cannot be discounted below itself.
      if (!(base.truck_cost > 0.0)) continue;
      EdgeCopy copy{edge, drones[i].id, hop, base.truck_cost * gamma(discount, hop), 1};
      tg.graph_.add_instance(base.origin, base.dest, copy.weight, copy.capacity);
      tg.copies_.push_back(copy);
    }
  }
  return tg;
}

Stage1Result solve_stage1(const TruckGraph& tg, std::span<const AgentSpec> trucks, mapf::SolverKind solver,
                          const mapf::SolverLimits& limits) {
  std::vector<AgentId> ordering;
  for (const auto& t : trucks) ordering.push_back(t.id);
  std::sort(ordering.begin(), ordering.end());

  Stage1Result out;
  out.solution = mapf::solve(solver, tg.graph(), trucks, ordering, limits);
  if (!out.solution.ok()) return out;
  for (const auto& path : out.solution.paths) {
    std::vector<EdgeId> road;
    std::vector<CopyUse> used;
    for (auto inst : path.instances) {
      road.push_back(tg.base_edge(inst));
      if (const auto* c = tg.copy(inst)) used.push_back({inst, *c});
    }
    out.road_paths.push_back(std::move(road));
    out.copies_used.push_back(std::move(used));
  }
  return out;
}

void write_diagnostics(std::ostream& out, const TruckGraph& tg, std::span<const AgentSpec> trucks,
                       const Stage1Result& result) {
  char buf[64];
  for (std::size_t i = 0; i < trucks.size() && i < result.solution.paths.size(); ++i) {
    const auto& path = result.solution.paths[i];
    for (std::size_t step = 0; step < path.instances.size(); ++step) {
      auto inst = path.instances[step];
      std::snprintf(buf, sizeof buf, "%.17g", tg.graph().instance(inst).weight);
      out << "truck " << trucks[i].id << " step " << step << " edge " << tg.base_edge(inst);
      if (const auto* c = tg.copy(inst)) {
        out << " copy drone " << c->drone << " hop " << c->hop;
      } else {
        out << " base drone - hop -";
      }
      out << " weight " << buf << '\n';
    }
  }
}

}  // namespace tandem::stage1
