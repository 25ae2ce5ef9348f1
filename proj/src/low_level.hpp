#pragma once

#include "tandem/mapf.hpp"

namespace tandem::mapf::internal {

struct FocalResult {
  Path path;
  double optimal_cost = 0.0;  // unconstrained-by-focal optimum, the node lower bound
};

std::optional<FocalResult> focal_search(const SearchGraph& sg, const AgentSpec& agent,
                                        const ConstraintSet& constraints, double w,
                                        const ConflictCount& conflict_count);

}  // namespace tandem::mapf::internal
