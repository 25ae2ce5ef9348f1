#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tandem/mapf.hpp"
#include "tandem/roadnet.hpp"

namespace tandem::stage1 {

using mapf::AgentId;
using mapf::AgentSpec;

enum class DiscountKind { Tanh, Sigmoid };

const char* to_string(DiscountKind kind);
DiscountKind parse_discount_kind(std::string_view name);

// Discount factor for an edge `hop` hops away from a nominal flight path.
// Both kinds give 1/2 at hop 0 and approach 1 from below.
double gamma(DiscountKind kind, int hop);

// A road edge duplicated for one drone, cheaper the closer it lies to that
// drone's nominal flight path.
struct EdgeCopy {
  EdgeId base_edge = 0;
  AgentId drone = 0;
  int hop = 0;
  double weight = 0.0;
  int capacity = 1;
};

// Per-drone shortest flight paths over the road network. Throws
// mapf::AgentUnreachable.
std::vector<RoadPath> nominal_paths(const RoadGraph& g, std::span<const AgentSpec> drones);

// Hop label for every edge within max_hops of the nominal path. Edges of the
// path get 0; every other edge gets max(1, nearest endpoint's undirected
// distance to the path's vertices). An empty path is anchored at `start`.
std::map<EdgeId, int> edge_hop_labels(const RoadGraph& g, NodeId start, std::span<const EdgeId> nominal,
                                      int max_hops);

// Road graph plus discounted copies. Instances [0, |E|) are the base road
// edges with id == EdgeId; copies follow, grouped by drone in input order and
// by ascending base edge within a drone.
class TruckGraph {
 public:
  const mapf::SearchGraph& graph() const { return graph_; }
  const RoadGraph& road() const { return *road_; }
  std::size_t num_copies() const { return copies_.size(); }
  std::span<const EdgeCopy> copies() const { return copies_; }

  EdgeId base_edge(mapf::InstanceId instance) const;
  // Null for base road instances.
  const EdgeCopy* copy(mapf::InstanceId instance) const;

 private:
  friend TruckGraph build_truck_graph(const RoadGraph&, std::span<const AgentSpec>, std::span<const RoadPath>, int,
                                      DiscountKind);
  const RoadGraph* road_ = nullptr;
  mapf::SearchGraph graph_;
  std::vector<EdgeCopy> copies_;
};

// `g` must outlive the returned graph.
TruckGraph build_truck_graph(const RoadGraph& g, std::span<const AgentSpec> drones, std::span<const RoadPath> nominals,
                             int max_hops, DiscountKind discount);

struct CopyUse {
  mapf::InstanceId instance = 0;
  EdgeCopy copy;
};

struct Stage1Result {
  mapf::Solution solution;                   // paths over the truck graph
  std::vector<std::vector<EdgeId>> road_paths;  // projected, parallel to trucks
  std::vector<std::vector<CopyUse>> copies_used;
};

// PP plans trucks in ascending id order.
Stage1Result solve_stage1(const TruckGraph& tg, std::span<const AgentSpec> trucks, mapf::SolverKind solver,
                          const mapf::SolverLimits& limits);

// One line per traversed instance: truck, step, base edge, base|copy, drone,
// hop, weight.
void write_diagnostics(std::ostream& out, const TruckGraph& tg, std::span<const AgentSpec> trucks,
                       const Stage1Result& result);

}  // namespace tandem::stage1
