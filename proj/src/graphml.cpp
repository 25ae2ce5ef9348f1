#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <istream>
#include <map>
#include <string>

#include "tandem/roadnet.hpp"

namespace tandem {

namespace pt = boost::property_tree;

namespace {

struct KeyMap {
  std::map<std::string, std::string> node;  // key id -> attr.name
  std::map<std::string, std::string> edge;
};

KeyMap read_keys(const pt::ptree& root) {
  KeyMap keys;
  for (const auto& [tag, child] : root) {
    if (tag != "key") continue;
    auto id = child.get<std::string>("<xmlattr>.id", "");
    auto name = child.get<std::string>(pt::ptree::path_type("<xmlattr>/attr.name", '/'), id);
    auto domain = child.get<std::string>("<xmlattr>.for", "all");
    if (domain == "node" || domain == "all") keys.node[id] = name;
    if (domain == "edge" || domain == "all") keys.edge[id] = name;
  }
  return keys;
}

std::map<std::string, std::string> read_data(const pt::ptree& elem, const std::map<std::string, std::string>& keys) {
  std::map<std::string, std::string> out;
  for (const auto& [tag, child] : elem) {
    if (tag != "data") continue;
    auto key = child.get<std::string>("<xmlattr>.key", "");
    auto it = keys.find(key);
    out[it == keys.end() ? key : it->second] = child.get_value<std::string>();
  }
  return out;
}

std::optional<double> to_real(const std::map<std::string, std::string>& data,
                              std::initializer_list<const char*> names) {
  for (const char* name : names) {
    auto it = data.find(name);
    if (it == data.end()) continue;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

RoadGraph load_graphml(std::istream& in, const std::string& length_attr, double unit_scale,
                       const LoadOptions& opts) {
  pt::ptree doc;
  try {
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& err) {
    throw RoadnetError(RoadnetError::Kind::ParseFailure, std::string("GraphML parse failure: ") + err.what(),
                       static_cast<int>(err.line()));
  }
  auto root_opt = doc.get_child_optional("graphml");
  if (!root_opt) throw RoadnetError(RoadnetError::Kind::ParseFailure, "missing <graphml> root element");
  const auto& root = *root_opt;
  auto graph_opt = root.get_child_optional("graph");
  if (!graph_opt) throw RoadnetError(RoadnetError::Kind::ParseFailure, "missing <graph> element");
  const auto& graph = *graph_opt;
  if (graph.get<std::string>("<xmlattr>.edgedefault", "directed") != "directed") {
    throw RoadnetError(RoadnetError::Kind::UndirectedGraph, "GraphML graph is not directed");
  }

  KeyMap keys = read_keys(root);
  RoadGraph g;
  for (const auto& [tag, child] : graph) {
    if (tag != "node") continue;
    auto id = child.get<std::string>("<xmlattr>.id", "");
    if (id.empty()) throw RoadnetError(RoadnetError::Kind::ParseFailure, "node without id");
    auto data = read_data(child, keys.node);
    auto lat = to_real(data, {"y", "lat"});
    auto lon = to_real(data, {"x", "lon"});
    std::optional<GeoPoint> geo;
    if (lat && lon) geo = GeoPoint{*lat, *lon};
    if (!g.find_node(id)) g.add_node(id, geo);
  }
  for (const auto& [tag, child] : graph) {
    if (tag != "edge") continue;
    auto src = child.get<std::string>("<xmlattr>.source", "");
    auto dst = child.get<std::string>("<xmlattr>.target", "");
    if (child.get<std::string>("<xmlattr>.directed", "true") == "false") {
      throw RoadnetError(RoadnetError::Kind::UndirectedGraph, "undirected edge " + src + "->" + dst);
    }
    auto data = read_data(child, keys.edge);
    auto it = data.find(length_attr);
    if (it == data.end()) {
      throw RoadnetError(RoadnetError::Kind::MissingLengthAttr,
                         "edge " + src + "->" + dst + " lacks attribute '" + length_attr + "'");
    }
    double raw = 0.0;
    try {
      raw = std::stod(it->second);
    } catch (const std::exception&) {
      throw RoadnetError(RoadnetError::Kind::ParseFailure, "non-numeric length '" + it->second + "'");
    }
    auto o = g.find_node(src);
    auto d = g.find_node(dst);
    if (!o) o = g.add_node(src);
    if (!d) d = g.add_node(dst);
    // OSM extracts occasionally carry degenerate loops; they are never useful
    // for routing and would violate the road-edge invariant.
    if (*o == *d) continue;
    double km = raw * unit_scale;
    g.add_edge(*o, *d, km, default_time(km, opts.truck_speed_km_per_step),
               default_time(km, opts.drone_speed_km_per_step));
  }
  if (g.num_edges() == 0) throw RoadnetError(RoadnetError::Kind::EmptyGraph, "GraphML graph has no edges");
  return g;
}

}  // namespace tandem
