#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tandem {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

inline constexpr NodeId kNoNode = -1;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

// A directed road link. Costs are in km; times are integer steps.
struct RoadEdge {
  EdgeId id = 0;
  NodeId origin = 0;
  NodeId dest = 0;
  double length_km = 0.0;
  double truck_cost = 0.0;
  double drone_cost = 0.0;
  int truck_time = 1;
  int drone_time = 1;
};

enum class CostKind { Truck, Drone };

class RoadnetError : public std::runtime_error {
 public:
  enum class Kind {
    EmptyGraph,
    MalformedLine,
    NegativeLength,
    SelfLoop,
    MissingLengthAttr,
    UndirectedGraph,
    ParseFailure,
  };

  RoadnetError(Kind kind, std::string message, int line = 0)
      : std::runtime_error(std::move(message)), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  // 1-based source line, 0 when not applicable.
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

// Directed multigraph of road links. Immutable once built; safe to share
// between concurrent solver runs.
class RoadGraph {
 public:
  NodeId add_node(std::string label, std::optional<GeoPoint> geo = std::nullopt);

  // Costs default to length_km. Throws RoadnetError on self-loops or
  // negative lengths.
  EdgeId add_edge(NodeId origin, NodeId dest, double length_km, int truck_time,
                  int drone_time);

  std::size_t num_nodes() const { return labels_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const RoadEdge& edge(EdgeId e) const { return edges_.at(static_cast<std::size_t>(e)); }
  std::span<const RoadEdge> edges() const { return edges_; }
  std::span<const EdgeId> out_edges(NodeId v) const { return out_.at(static_cast<std::size_t>(v)); }
  std::span<const EdgeId> in_edges(NodeId v) const { return in_.at(static_cast<std::size_t>(v)); }

  const std::string& label(NodeId v) const { return labels_.at(static_cast<std::size_t>(v)); }
  std::optional<NodeId> find_node(std::string_view label) const;
  const std::optional<GeoPoint>& geo(NodeId v) const { return geo_.at(static_cast<std::size_t>(v)); }

  bool valid_node(NodeId v) const { return v >= 0 && static_cast<std::size_t>(v) < num_nodes(); }
  double cost(EdgeId e, CostKind kind) const;
  double total_length_km() const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::optional<GeoPoint>> geo_;
  std::map<std::string, NodeId, std::less<>> index_;
  std::vector<RoadEdge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
};

struct LoadOptions {
  double truck_speed_km_per_step = 0.5;
  double drone_speed_km_per_step = 0.5;
};

// max(1, round(length / speed))
int default_time(double length_km, double speed_km_per_step);

// `origin,dest,length_km[,truck_time,drone_time]` per line; `#` comments.
RoadGraph load_edgelist(std::istream& in, const LoadOptions& opts = {});
RoadGraph load_edgelist(std::string_view text, const LoadOptions& opts = {});
void write_edgelist(std::ostream& out, const RoadGraph& g);

RoadGraph load_graphml(std::istream& in, const std::string& length_attr, double unit_scale,
                       const LoadOptions& opts = {});

RoadGraph gen_grid(int rows, int cols, double edge_km, std::uint64_t seed,
                   double jitter = 0.0);

// Node id of grid cell (r, c) as laid out by gen_grid.
inline NodeId grid_node(int cols, int r, int c) { return static_cast<NodeId>(r * cols + c); }

struct RoadPath {
  std::vector<EdgeId> edges;
  double cost = 0.0;
};

// Minimum cost, then fewest edges, then lexicographically smallest edge id
// sequence. Empty optional when dst is unreachable.
std::optional<RoadPath> shortest_path(const RoadGraph& g, CostKind kind, NodeId src, NodeId dst);

// Undirected BFS hop counts from the seed set; nodes farther than max_hops
// are omitted.
std::map<NodeId, int> hop_distances(const RoadGraph& g, const std::set<NodeId>& seeds, int max_hops);

// Node sequence of a path starting at `start` (size edges + 1).
std::vector<NodeId> path_nodes(const RoadGraph& g, NodeId start, std::span<const EdgeId> edges);

double path_cost(const RoadGraph& g, CostKind kind, std::span<const EdgeId> edges);

}  // namespace tandem
