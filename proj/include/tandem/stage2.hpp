#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "tandem/mapf.hpp"
#include "tandem/roadnet.hpp"

namespace tandem::stage2 {

using mapf::AgentId;
using mapf::AgentSpec;

// Assignment label for an edge the drone flies itself.
inline constexpr AgentId kFlying = -1;

struct TransitStop {
  AgentId truck = 0;
  int position = 0;  // index into the truck's node sequence
  NodeId road_node = 0;
  mapf::VertexId vertex = 0;
};

enum class InstanceKind { Road, Transit, Board, Alight };

struct InstanceInfo {
  InstanceKind kind = InstanceKind::Road;
  EdgeId base_edge = -1;  // road edge flown or ridden; -1 for board/alight
  AgentId truck = kFlying;
  int position = -1;      // truck path edge index (transit) or stop index (board/alight)
};

// Road graph under drone weights, overlaid with one forward chain of
// zero-weight transit edges per truck. Road instances keep id == EdgeId;
// per truck, transit edges come next, then board edges, then alight edges.
class CompositeGraph {
 public:
  const mapf::SearchGraph& graph() const { return graph_; }
  const RoadGraph& road() const { return *road_; }
  int capacity() const { return capacity_; }
  const InstanceInfo& info(mapf::InstanceId instance) const { return info_.at(static_cast<std::size_t>(instance)); }
  std::span<const TransitStop> stops() const { return stops_; }
  std::size_t num_transit_edges() const { return num_transit_; }
  std::span<const AgentSpec> trucks() const { return trucks_; }
  std::span<const std::vector<EdgeId>> truck_paths() const { return truck_paths_; }

 private:
  friend CompositeGraph build_composite(const RoadGraph&, std::span<const AgentSpec>,
                                        std::span<const std::vector<EdgeId>>, int);
  const RoadGraph* road_ = nullptr;
  int capacity_ = 1;
  mapf::SearchGraph graph_;
  std::vector<InstanceInfo> info_;
  std::vector<TransitStop> stops_;
  std::size_t num_transit_ = 0;
  std::vector<AgentSpec> trucks_;
  std::vector<std::vector<EdgeId>> truck_paths_;
};

// `g` must outlive the result. capacity may be mapf::kUnlimited.
CompositeGraph build_composite(const RoadGraph& g, std::span<const AgentSpec> trucks,
                               std::span<const std::vector<EdgeId>> truck_paths, int capacity);

// Drones by descending shortest flight cost, ties by ascending id.
std::vector<AgentId> drone_order(const RoadGraph& g, std::span<const AgentSpec> drones);

struct DroneSolution {
  std::vector<EdgeId> road_path;
  std::vector<AgentId> assignment;  // truck id or kFlying, per road edge
  std::vector<int> positions;       // truck path edge index, -1 when flying

  friend bool operator==(const DroneSolution&, const DroneSolution&) = default;
};

DroneSolution extract_assignments(const CompositeGraph& cg, const mapf::Path& path);

struct Stage2Result {
  mapf::Solution solution;  // paths over the composite graph
  std::vector<DroneSolution> drones;
};

// PP plans drones in drone_order.
Stage2Result solve_stage2(const CompositeGraph& cg, std::span<const AgentSpec> drones, mapf::SolverKind solver,
                          const mapf::SolverLimits& limits);

// Flying cost: drone cost summed over FLYING edges only.
double flying_cost(const RoadGraph& g, const DroneSolution& sol);

// `edges <ids...>` / `labels <truck|->...` / `positions <pos|->...`
void write_drone_solution(std::ostream& out, const DroneSolution& sol);

}  // namespace tandem::stage2
