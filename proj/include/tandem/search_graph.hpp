#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace tandem::mapf {

using VertexId = std::int32_t;
using InstanceId = std::int32_t;

inline constexpr int kUnlimited = std::numeric_limits<int>::max();

// One traversable arc. Capacity counts distinct agents allowed on it.
struct EdgeInstance {
  VertexId from = 0;
  VertexId to = 0;
  double weight = 0.0;
  int capacity = kUnlimited;

  bool limited() const { return capacity != kUnlimited; }
};

// Weighted directed multigraph the solvers plan on. Instance ids are dense
// and assigned in insertion order, so builders control tie-breaking by the
// order they add instances in.
class SearchGraph {
 public:
  SearchGraph() = default;
  explicit SearchGraph(std::size_t num_vertices) : out_(num_vertices), in_(num_vertices) {}

  VertexId add_vertex();
  InstanceId add_instance(VertexId from, VertexId to, double weight, int capacity = kUnlimited);

  std::size_t num_vertices() const { return out_.size(); }
  std::size_t num_instances() const { return instances_.size(); }
  const EdgeInstance& instance(InstanceId id) const { return instances_[static_cast<std::size_t>(id)]; }
  std::span<const InstanceId> out(VertexId v) const { return out_[static_cast<std::size_t>(v)]; }
  std::span<const InstanceId> in(VertexId v) const { return in_[static_cast<std::size_t>(v)]; }
  bool valid_vertex(VertexId v) const { return v >= 0 && static_cast<std::size_t>(v) < num_vertices(); }

  // Exact unconstrained cost-to-goal for every vertex (infinity if the goal
  // is unreachable). Admissible under any constraint set.
  std::vector<double> distances_to(VertexId goal) const;

 private:
  std::vector<EdgeInstance> instances_;
  std::vector<std::vector<InstanceId>> out_;
  std::vector<std::vector<InstanceId>> in_;
};

}  // namespace tandem::mapf
