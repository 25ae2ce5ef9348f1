#include "tandem/io.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json_sources.hpp"

namespace tandem::io {

using nlohmann::json;
using pipeline::GlobalSolution;

namespace {

std::string real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kind_name(mapf::AgentKind k) { return k == mapf::AgentKind::Truck ? "truck" : "drone"; }

template <class T>
void write_list(std::ostream& out, const char* tag, const std::vector<T>& items) {
  out << tag;
  for (const auto& x : items) out << ' ' << x;
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line split into tokens; false at end of input.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      std::istringstream ss(line);
      tokens.clear();
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  std::vector<std::string> expect(const std::string& head) {
    std::vector<std::string> tokens;
    if (!next(tokens)) fail("unexpected end of file, wanted '" + head + "'");
    if (tokens.front() != head) fail("expected '" + head + "', found '" + tokens.front() + "'");
    return tokens;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError("solution line " + std::to_string(lineno_) + ": " + why, lineno_);
  }

  long to_long(const std::string& tok) const {
    try {
      std::size_t used = 0;
      long v = std::stol(tok, &used);
      if (used != tok.size()) fail("bad integer '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad integer '" + tok + "'");
    }
  }

  double to_real(const std::string& tok) const {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) fail("bad number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad number '" + tok + "'");
    }
  }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

std::vector<long> tail_longs(const LineReader& r, const std::vector<std::string>& tokens, bool dash_is_flying) {
  std::vector<long> out;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (dash_is_flying && tokens[i] == "-") out.push_back(-1);
    else out.push_back(r.to_long(tokens[i]));
  }
  return out;
}

}  // namespace

void write_solution(std::ostream& out, const GlobalSolution& sol) {
  out << kSolutionMagic << " v" << kSolutionVersion << '\n';
  out << "[agents]\n";
  for (const auto* group : {&sol.trucks, &sol.drones}) {
    for (const auto& a : *group) out << kind_name(a.kind) << ' ' << a.id << ' ' << a.start << ' ' << a.goal << '\n';
  }
  out << "[paths]\n";
  for (std::size_t i = 0; i < sol.trucks.size(); ++i) {
    out << "truck " << sol.trucks[i].id << '\n';
    write_list(out, "edges", sol.truck_paths[i]);
  }
  for (std::size_t i = 0; i < sol.drones.size(); ++i) {
    out << "drone " << sol.drones[i].id << '\n';
    stage2::write_drone_solution(out, sol.drone_solutions[i]);
  }
  out << "[cost]\n";
  out << "truck_total " << real(sol.cost.truck_total) << '\n';
  out << "drone_flying_total " << real(sol.cost.drone_flying_total) << '\n';
  out << "grand_total " << real(sol.cost.grand_total) << '\n';
  out << "[metadata]\n";
  const auto& m = sol.meta;
  out << "approach " << m.approach << '\n';
  out << "stage1_solver " << m.stage1_solver << '\n';
  out << "stage2_solver " << m.stage2_solver << '\n';
  out << "capacity " << m.capacity << '\n';
  out << "wall_s " << real(m.wall_s) << '\n';
  out << "stage1_s " << real(m.stage1_s) << '\n';
  out << "stage2_s " << real(m.stage2_s) << '\n';
  out << "post_s " << real(m.post_s) << '\n';
  out << "conflicts_resolved " << m.conflicts_resolved << '\n';
  write_list(out, "rerouted_trucks", m.rerouted_trucks);
  out << "fell_back_to_direct " << (m.fell_back_to_direct ? 1 : 0) << '\n';
  out << "end\n";
}

GlobalSolution read_solution(std::istream& in) {
  LineReader r(in);
  GlobalSolution sol;
  auto header = r.expect(kSolutionMagic);
  if (header.size() != 2 || header[1] != "v" + std::to_string(kSolutionVersion)) r.fail("unsupported version");
  r.expect("[agents]");

  std::vector<std::string> tok;
  while (true) {
    if (!r.next(tok)) r.fail("unexpected end of file in [agents]");
    if (tok.front() == "[paths]") break;
    if (tok.size() != 4 || (tok[0] != "truck" && tok[0] != "drone")) r.fail("bad agent record");
    mapf::AgentSpec a{static_cast<int>(r.to_long(tok[1])),
                      tok[0] == "truck" ? mapf::AgentKind::Truck : mapf::AgentKind::Drone,
                      static_cast<mapf::VertexId>(r.to_long(tok[2])), static_cast<mapf::VertexId>(r.to_long(tok[3]))};
    (a.kind == mapf::AgentKind::Truck ? sol.trucks : sol.drones).push_back(a);
  }

  auto to_edges = [](const std::vector<long>& v) { return std::vector<EdgeId>(v.begin(), v.end()); };
  for (const auto& t : sol.trucks) {
    auto head = r.expect("truck");
    if (head.size() != 2 || r.to_long(head[1]) != t.id) r.fail("truck paths out of agent order");
    sol.truck_paths.push_back(to_edges(tail_longs(r, r.expect("edges"), false)));
  }
  for (const auto& d : sol.drones) {
    auto head = r.expect("drone");
    if (head.size() != 2 || r.to_long(head[1]) != d.id) r.fail("drone paths out of agent order");
    stage2::DroneSolution ds;
    ds.road_path = to_edges(tail_longs(r, r.expect("edges"), false));
    for (long v : tail_longs(r, r.expect("labels"), true)) ds.assignment.push_back(static_cast<mapf::AgentId>(v));
    for (long v : tail_longs(r, r.expect("positions"), true)) ds.positions.push_back(static_cast<int>(v));
    sol.drone_solutions.push_back(std::move(ds));
  }

  r.expect("[cost]");
  auto one_real = [&](const char* key) {
    auto t = r.expect(key);
    if (t.size() != 2) r.fail(std::string("bad ") + key);
    return r.to_real(t[1]);
  };
  sol.cost.truck_total = one_real("truck_total");
  sol.cost.drone_flying_total = one_real("drone_flying_total");
  sol.cost.grand_total = one_real("grand_total");

  r.expect("[metadata]");
  auto one_word = [&](const char* key) {
    auto t = r.expect(key);
    if (t.size() != 2) r.fail(std::string("bad ") + key);
    return t[1];
  };
  auto& m = sol.meta;
  m.approach = one_word("approach");
  m.stage1_solver = one_word("stage1_solver");
  m.stage2_solver = one_word("stage2_solver");
  m.capacity = static_cast<int>(r.to_long(one_word("capacity")));
  m.wall_s = one_real("wall_s");
  m.stage1_s = one_real("stage1_s");
  m.stage2_s = one_real("stage2_s");
  m.post_s = one_real("post_s");
  m.conflicts_resolved = r.to_long(one_word("conflicts_resolved"));
  for (long v : tail_longs(r, r.expect("rerouted_trucks"), false)) m.rerouted_trucks.push_back(static_cast<int>(v));
  m.fell_back_to_direct = r.to_long(one_word("fell_back_to_direct")) != 0;
  r.expect("end");
  return sol;
}

std::shared_ptr<const RoadGraph> load_graph(const GraphSource& source) {
  using Kind = GraphSource::Kind;
  if (source.kind == Kind::Grid) {
    return std::make_shared<const RoadGraph>(
        gen_grid(source.rows, source.cols, source.edge_km, source.seed, source.jitter));
  }
  std::ifstream in(source.path);
  if (!in) throw std::runtime_error("cannot open graph file '" + source.path + "'");
  if (source.kind == Kind::EdgeList) return std::make_shared<const RoadGraph>(load_edgelist(in));
  return std::make_shared<const RoadGraph>(load_graphml(in, source.length_attr, source.unit_scale));
}

GraphSource internal::parse_graph_source(const json& j, const std::string& base_dir) {
  GraphSource src;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? p : (std::filesystem::path(base_dir) / path).string();
  };
  if (j.contains("edgelist")) {
    src.kind = GraphSource::Kind::EdgeList;
    src.path = resolve(j.at("edgelist").get<std::string>());
  } else if (j.contains("graphml")) {
    src.kind = GraphSource::Kind::GraphML;
    src.path = resolve(j.at("graphml").get<std::string>());
    src.length_attr = j.value("length_attr", std::string("length"));
    src.unit_scale = j.value("unit_scale", 1.0);
  } else if (j.contains("grid")) {
    src.kind = GraphSource::Kind::Grid;
    const auto& dims = j.at("grid");
    src.rows = dims.at(0).get<int>();
    src.cols = dims.at(1).get<int>();
    src.edge_km = j.value("edge_km", 1.0);
    src.seed = j.value("seed", std::uint64_t{0});
    src.jitter = j.value("jitter", 0.0);
  } else {
    throw std::invalid_argument("graph must name one of edgelist, graphml or grid");
  }
  return src;
}

namespace {

NodeId node_ref(const RoadGraph& g, const json& j) {
  if (j.is_number_integer()) {
    auto v = j.get<NodeId>();
    if (!g.valid_node(v)) throw std::invalid_argument("node index " + std::to_string(v) + " out of range");
    return v;
  }
  auto label = j.get<std::string>();
  auto id = g.find_node(label);
  if (!id) throw std::invalid_argument("unknown node label '" + label + "'");
  return *id;
}

std::vector<mapf::AgentSpec> parse_agents(const RoadGraph& g, const json& list, mapf::AgentKind kind) {
  std::vector<mapf::AgentSpec> out;
  for (const auto& a : list) {
    out.push_back({a.at("id").get<int>(), kind, node_ref(g, a.at("start")), node_ref(g, a.at("goal"))});
  }
  return out;
}

}  // namespace

pipeline::ProblemSpec read_problem(std::istream& in, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw FormatError(std::string("problem file: ") + err.what(), 0);
  }
  try {
    pipeline::ProblemSpec spec;
    spec.graph = load_graph(internal::parse_graph_source(j.at("graph"), base_dir));
    spec.trucks = parse_agents(*spec.graph, j.value("trucks", json::array()), mapf::AgentKind::Truck);
    spec.drones = parse_agents(*spec.graph, j.value("drones", json::array()), mapf::AgentKind::Drone);
    spec.capacity = j.value("capacity", spec.capacity);
    spec.max_hops = j.value("k_hops", spec.max_hops);
    spec.discount = stage1::parse_discount_kind(j.value("discount", std::string("tanh")));
    spec.stage1_solver = mapf::parse_solver_kind(j.value("stage1", std::string("pp")));
    spec.stage2_solver = mapf::parse_solver_kind(j.value("stage2", std::string("pp")));
    spec.limits.w = j.value("w", spec.limits.w);
    spec.limits.wall_timeout_s = j.value("timeout_s", spec.limits.wall_timeout_s);
    spec.limits.conflict_threshold = j.value("conflict_threshold", spec.limits.conflict_threshold);
    spec.fallback_to_direct = j.value("fallback_to_direct", spec.fallback_to_direct);
    pipeline::check_spec(spec);
    return spec;
  } catch (const json::exception& err) {
    throw FormatError(std::string("problem file: ") + err.what(), 0);
  }
}

}  // namespace tandem::io
