#include "tandem/roadnet.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "tandem/detail/canonical_search.hpp"

namespace tandem {

NodeId RoadGraph::add_node(std::string label, std::optional<GeoPoint> geo) {
  auto id = static_cast<NodeId>(labels_.size());
  index_.emplace(label, id);
  labels_.push_back(std::move(label));
  geo_.push_back(geo);
  out_.emplace_back();
  in_.emplace_back();
  return id;
}

EdgeId RoadGraph::add_edge(NodeId origin, NodeId dest, double length_km, int truck_time,
                           int drone_time) {
  if (!valid_node(origin) || !valid_node(dest)) {
    throw std::out_of_range("edge endpoint is not a node of the graph");
  }
  if (origin == dest) {
    throw RoadnetError(RoadnetError::Kind::SelfLoop, "self-loop at node " + labels_[origin]);
  }
  if (!(length_km >= 0.0) || !std::isfinite(length_km)) {
    throw RoadnetError(RoadnetError::Kind::NegativeLength, "edge length must be finite and nonnegative");
  }
  RoadEdge e;
  e.id = static_cast<EdgeId>(edges_.size());
  e.origin = origin;
  e.dest = dest;
  e.length_km = length_km;
  e.truck_cost = length_km;
  e.drone_cost = length_km;
  e.truck_time = std::max(1, truck_time);
  e.drone_time = std::max(1, drone_time);
  edges_.push_back(e);
  out_[static_cast<std::size_t>(origin)].push_back(e.id);
  in_[static_cast<std::size_t>(dest)].push_back(e.id);
  return e.id;
}

std::optional<NodeId> RoadGraph::find_node(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double RoadGraph::cost(EdgeId e, CostKind kind) const {
  const auto& re = edge(e);
  return kind == CostKind::Truck ? re.truck_cost : re.drone_cost;
}

double RoadGraph::total_length_km() const {
  double total = 0.0;
  for (const auto& e : edges_) total += e.length_km;
  return total;
}

int default_time(double length_km, double speed_km_per_step) {
  return std::max(1, static_cast<int>(std::lround(length_km / speed_km_per_step)));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(',', pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::optional<double> parse_real(std::string_view field) {
  if (field.empty()) return std::nullopt;
  std::string buf(field);
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view field) {
  auto v = parse_real(field);
  if (!v || *v != std::floor(*v) || *v < 1 || *v > 1e9) return std::nullopt;
  return static_cast<int>(*v);
}

NodeId intern(RoadGraph& g, std::string_view label) {
  if (auto id = g.find_node(label)) return *id;
  return g.add_node(std::string(label));
}

}  // namespace

RoadGraph load_edgelist(std::istream& in, const LoadOptions& opts) {
  RoadGraph g;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_commas(line);
    auto malformed = [&](const std::string& why) {
      return RoadnetError(RoadnetError::Kind::MalformedLine,
                          "line " + std::to_string(lineno) + ": " + why, lineno);
    };
    if (fields.size() != 3 && fields.size() != 5) throw malformed("expected 3 or 5 fields");
    if (fields[0].empty() || fields[1].empty()) throw malformed("empty node label");
    auto length = parse_real(fields[2]);
    if (!length) throw malformed("bad length '" + std::string(fields[2]) + "'");
    if (*length < 0.0) {
      throw RoadnetError(RoadnetError::Kind::NegativeLength,
                         "line " + std::to_string(lineno) + ": negative length", lineno);
    }
    if (fields[0] == fields[1]) {
      throw RoadnetError(RoadnetError::Kind::SelfLoop,
                         "line " + std::to_string(lineno) + ": self-loop", lineno);
    }
    int truck_time = default_time(*length, opts.truck_speed_km_per_step);
    int drone_time = default_time(*length, opts.drone_speed_km_per_step);
    if (fields.size() == 5) {
      auto tt = parse_int(fields[3]);
      auto dt = parse_int(fields[4]);
      if (!tt || !dt) throw malformed("times must be positive integers");
      truck_time = *tt;
      drone_time = *dt;
    }
    NodeId o = intern(g, fields[0]);
    NodeId d = intern(g, fields[1]);
    g.add_edge(o, d, *length, truck_time, drone_time);
  }
  if (g.num_edges() == 0) throw RoadnetError(RoadnetError::Kind::EmptyGraph, "edge list has no edges");
  return g;
}

RoadGraph load_edgelist(std::string_view text, const LoadOptions& opts) {
  std::istringstream in{std::string(text)};
  return load_edgelist(in, opts);
}

void write_edgelist(std::ostream& out, const RoadGraph& g) {
  out << "# origin,dest,length_km,truck_time,drone_time\n";
  char buf[64];
  for (const auto& e : g.edges()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.length_km);
    out << g.label(e.origin) << ',' << g.label(e.dest) << ',' << buf << ',' << e.truck_time << ','
        << e.drone_time << '\n';
  }
}

RoadGraph gen_grid(int rows, int cols, double edge_km, std::uint64_t seed, double jitter) {
  if (rows < 1 || cols < 1 || rows * cols < 2) throw std::invalid_argument("grid needs at least 2 cells");
  if (!(edge_km > 0.0)) throw std::invalid_argument("edge_km must be positive");
  RoadGraph g;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) g.add_node(std::to_string(r) + "_" + std::to_string(c));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto length = [&] { return jitter > 0.0 ? edge_km * (1.0 + jitter * unit(rng)) : edge_km; };
  auto link = [&](NodeId a, NodeId b) {
    double len = length();
    int t = default_time(len, 0.5);
    g.add_edge(a, b, len, t, t);
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      NodeId v = grid_node(cols, r, c);
      if (c + 1 < cols) {
        link(v, grid_node(cols, r, c + 1));
        link(grid_node(cols, r, c + 1), v);
      }
      if (r + 1 < rows) {
        link(v, grid_node(cols, r + 1, c));
        link(grid_node(cols, r + 1, c), v);
      }
    }
  }
  return g;
}

std::optional<RoadPath> shortest_path(const RoadGraph& g, CostKind kind, NodeId src, NodeId dst) {
  if (!g.valid_node(src) || !g.valid_node(dst)) throw std::out_of_range("shortest_path: invalid node");
  auto labels = detail::backward_labels(g.num_nodes(), dst, [&](NodeId v, auto&& f) {
    for (EdgeId e : g.in_edges(v)) f(e, g.edge(e).origin, g.cost(e, kind));
  });
  auto edges = detail::extract_canonical(labels, src, dst, [&](NodeId v, auto&& f) {
    for (EdgeId e : g.out_edges(v)) f(e, g.edge(e).dest, g.cost(e, kind));
  });
  if (!edges) return std::nullopt;
  return RoadPath{std::move(*edges), labels[static_cast<std::size_t>(src)].cost};
}

std::map<NodeId, int> hop_distances(const RoadGraph& g, const std::set<NodeId>& seeds, int max_hops) {
  std::vector<int> dist(g.num_nodes(), -1);
  std::deque<NodeId> queue;
  for (NodeId s : seeds) {
    if (!g.valid_node(s)) throw std::out_of_range("hop_distances: invalid seed");
    dist[static_cast<std::size_t>(s)] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    int d = dist[static_cast<std::size_t>(v)];
    if (d >= max_hops) continue;
    auto visit = [&](NodeId u) {
      if (dist[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = d + 1;
        queue.push_back(u);
      }
    };
    for (EdgeId e : g.out_edges(v)) visit(g.edge(e).dest);
    for (EdgeId e : g.in_edges(v)) visit(g.edge(e).origin);
  }
  std::map<NodeId, int> out;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] >= 0) out.emplace(static_cast<NodeId>(v), dist[v]);
  }
  return out;
}

std::vector<NodeId> path_nodes(const RoadGraph& g, NodeId start, std::span<const EdgeId> edges) {
  std::vector<NodeId> nodes{start};
  for (EdgeId e : edges) nodes.push_back(g.edge(e).dest);
  return nodes;
}

double path_cost(const RoadGraph& g, CostKind kind, std::span<const EdgeId> edges) {
  double total = 0.0;
  for (EdgeId e : edges) total += g.cost(e, kind);
  return total;
}

}  // namespace tandem
