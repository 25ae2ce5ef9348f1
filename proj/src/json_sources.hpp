#pragma once

#include <string>

#include "json.hpp"
#include "tandem/io.hpp"

namespace tandem::io::internal {

// {"edgelist": path} | {"graphml": path, "length_attr", "unit_scale"} |
// {"grid": [rows, cols], "edge_km", "seed", "jitter"}
GraphSource parse_graph_source(const nlohmann::json& j, const std::string& base_dir);

}  // namespace tandem::io::internal
