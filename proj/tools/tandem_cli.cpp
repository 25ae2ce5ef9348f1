// Command-line front end: solve, bench, gen-grid, validate, convert.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "tandem/bench.hpp"
#include "tandem/io.hpp"
#include "tandem/pipeline.hpp"

namespace {

using namespace tandem;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitExhausted = 2;
constexpr int kExitInput = 3;

struct GraphArgs {
  std::string edgelist;
  std::string graphml;
  std::string length_attr = "length";
  double unit_scale = 1.0;
  std::string grid;  // RxC
  double edge_km = 1.0;
  double jitter = 0.0;
  std::uint64_t grid_seed = 0;

  void add(CLI::App* app) {
    app->add_option("--edgelist", edgelist, "Road graph as an edge list");
    app->add_option("--graphml", graphml, "Road graph as directed GraphML");
    app->add_option("--length-attr", length_attr, "GraphML edge attribute holding the length");
    app->add_option("--unit-scale", unit_scale, "Multiplier turning the length attribute into km");
    app->add_option("--grid", grid, "Synthetic grid, e.g. 10x10");
    app->add_option("--edge-km", edge_km, "Grid edge length in km");
    app->add_option("--jitter", jitter, "Relative grid length jitter");
    app->add_option("--grid-seed", grid_seed, "Seed for grid jitter");
  }

  bool given() const { return !edgelist.empty() || !graphml.empty() || !grid.empty(); }

  io::GraphSource source() const {
    io::GraphSource s;
    if (!edgelist.empty()) {
      s.kind = io::GraphSource::Kind::EdgeList;
      s.path = edgelist;
    } else if (!graphml.empty()) {
      s.kind = io::GraphSource::Kind::GraphML;
      s.path = graphml;
      s.length_attr = length_attr;
      s.unit_scale = unit_scale;
    } else {
      s.kind = io::GraphSource::Kind::Grid;
      auto x = grid.find_first_of("xX");
      if (x == std::string::npos) throw std::invalid_argument("--grid expects ROWSxCOLS");
      s.rows = std::stoi(grid.substr(0, x));
      s.cols = std::stoi(grid.substr(x + 1));
      s.edge_km = edge_km;
      s.jitter = jitter;
      s.seed = grid_seed;
    }
    return s;
  }
};

struct SolverArgs {
  int capacity = 5;
  int k_hops = 3;
  std::string discount = "tanh";
  std::string stage1 = "pp";
  std::string stage2 = "pp";
  double w = 1.3;
  double timeout_s = 600.0;
  int conflict_threshold = 500;

  void add(CLI::App* app) {
    app->add_option("--capacity", capacity, "Drones per truck");
    app->add_option("--k-hops", k_hops, "Hop radius for discounted copies");
    app->add_option("--discount", discount, "Discount function")->check(CLI::IsMember({"tanh", "sigmoid"}));
    app->add_option("--stage1", stage1, "Stage 1 solver")->check(CLI::IsMember({"cbs", "ecbs", "pp"}));
    app->add_option("--stage2", stage2, "Stage 2 solver")->check(CLI::IsMember({"cbs", "ecbs", "pp"}));
    app->add_option("--w", w, "ECBS suboptimality factor");
    app->add_option("--timeout-s", timeout_s, "Wall-clock limit per solve");
    app->add_option("--conflict-threshold", conflict_threshold, "Maximum conflicts resolved");
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
  } else {
    auto out = open_out(path);
    write(out);
  }
}

std::vector<mapf::AgentSpec> random_agents(const RoadGraph& g, int trucks, int drones, std::uint64_t seed,
                                           std::vector<mapf::AgentSpec>& drone_out) {
  bench::TrialConfig cfg;
  cfg.trucks = trucks;
  cfg.drones = drones;
  cfg.trials = 1;
  cfg.seed = seed;
  auto trial = bench::gen_trials(g, cfg).front();
  drone_out = trial.drones;
  return trial.trucks;
}

int run_solve(const std::string& problem_path, const GraphArgs& graph, const SolverArgs& sa, int trucks, int drones,
              std::uint64_t seed, const std::string& approach, const std::string& output) {
  pipeline::ProblemSpec spec;
  if (!problem_path.empty()) {
    std::ifstream in(problem_path);
    if (!in) throw std::runtime_error("cannot open '" + problem_path + "'");
    spec = io::read_problem(in, std::filesystem::path(problem_path).parent_path().string());
  } else {
    if (!graph.given()) throw std::invalid_argument("solve needs --problem or a graph option");
    spec.graph = io::load_graph(graph.source());
    spec.trucks = random_agents(*spec.graph, trucks, drones, seed, spec.drones);
    spec.capacity = sa.capacity;
    spec.max_hops = sa.k_hops;
    spec.discount = stage1::parse_discount_kind(sa.discount);
    spec.stage1_solver = mapf::parse_solver_kind(sa.stage1);
    spec.stage2_solver = mapf::parse_solver_kind(sa.stage2);
    spec.limits = {sa.conflict_threshold, sa.timeout_s, sa.w};
  }
  pipeline::GlobalSolution sol;
  if (approach == "direct") {
    sol = pipeline::solve_direct(spec);
  } else if (approach == "dpp") {
    sol = pipeline::solve_dpp(spec);
  } else {
    if (approach == "ecbs" || approach == "pp") {
      spec.stage1_solver = spec.stage2_solver = mapf::parse_solver_kind(approach);
    }
    sol = pipeline::solve(spec);
  }
  emit(output, [&](std::ostream& out) { io::write_solution(out, sol); });
  std::cerr << sol.meta.approach << ": truck " << sol.cost.truck_total << " km + drone " << sol.cost.drone_flying_total
            << " km = " << sol.cost.grand_total << " km in " << sol.meta.wall_s << " s\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated truck and drone routing on road networks"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one problem and write a solution file");
  std::string problem_path, solve_out, solve_approach = "two-stage";
  int solve_trucks = 5, solve_drones = 10;
  std::uint64_t solve_seed = 0;
  GraphArgs solve_graph;
  SolverArgs solve_args;
  solve->add_option("--problem", problem_path, "JSON problem file");
  solve_graph.add(solve);
  solve_args.add(solve);
  solve->add_option("--trucks", solve_trucks, "Random trucks when no problem file is given");
  solve->add_option("--drones", solve_drones, "Random drones when no problem file is given");
  solve->add_option("--seed", solve_seed, "Seed for random agents");
  solve->add_option("--approach", solve_approach, "direct | two-stage | dpp | ecbs | pp")
      ->check(CLI::IsMember({"direct", "two-stage", "dpp", "ecbs", "pp"}));
  solve->add_option("-o,--output", solve_out, "Solution file (default stdout)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run seeded trials and summarize");
  std::string config_path, bench_out, per_trial_out, format = "csv";
  GraphArgs bench_graph;
  bench::TrialConfig cfg;
  std::vector<std::string> approaches;
  int workers = -1;
  bench_cmd->add_option("--config", config_path, "JSON benchmark config");
  bench_graph.add(bench_cmd);
  auto* o_trucks = bench_cmd->add_option("--trucks", cfg.trucks, "Trucks per trial");
  auto* o_drones = bench_cmd->add_option("--drones", cfg.drones, "Drones per trial");
  auto* o_cap = bench_cmd->add_option("--capacity", cfg.capacity, "Drones per truck");
  auto* o_trials = bench_cmd->add_option("--trials", cfg.trials, "Number of trials");
  auto* o_seed = bench_cmd->add_option("--seed", cfg.seed, "Master seed");
  bench_cmd->add_option("--approach", approaches, "direct, ecbs, pp, dpp (repeatable)")
      ->check(CLI::IsMember({"direct", "ecbs", "pp", "dpp"}));
  auto* o_w = bench_cmd->add_option("--w", cfg.limits.w, "ECBS suboptimality factor");
  auto* o_k = bench_cmd->add_option("--k-hops", cfg.max_hops, "Hop radius");
  std::string bench_discount;
  bench_cmd->add_option("--discount", bench_discount, "tanh | sigmoid")->check(CLI::IsMember({"tanh", "sigmoid"}));
  auto* o_timeout = bench_cmd->add_option("--timeout-s", cfg.limits.wall_timeout_s, "Per-solve wall-clock limit");
  auto* o_ct = bench_cmd->add_option("--conflict-threshold", cfg.limits.conflict_threshold, "Conflict limit");
  bench_cmd->add_option("--workers", workers, "Parallel trial workers (1 = serial)");
  bench_cmd->add_option("--format", format, "csv | markdown")->check(CLI::IsMember({"csv", "markdown", "md"}));
  bench_cmd->add_option("-o,--output", bench_out, "Summary file (default stdout)");
  bench_cmd->add_option("--per-trial", per_trial_out, "Also write per-trial CSV here");

  // gen-grid
  auto* gen = app.add_subcommand("gen-grid", "Emit a grid road network as an edge list");
  int rows = 10, cols = 10;
  double edge_km = 1.0, jitter = 0.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--rows", rows, "Rows")->required();
  gen->add_option("--cols", cols, "Columns")->required();
  gen->add_option("--edge-km", edge_km, "Edge length in km");
  gen->add_option("--jitter", jitter, "Relative length jitter");
  gen->add_option("--seed", gen_seed, "Jitter seed");
  gen->add_option("-o,--output", gen_out, "Output file (default stdout)");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a solution file against its road graph");
  std::string solution_path;
  GraphArgs validate_graph;
  int validate_capacity = 0;
  validate->add_option("--solution", solution_path, "Solution file")->required();
  validate_graph.add(validate);
  validate->add_option("--capacity", validate_capacity, "Override the capacity recorded in the solution");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert GraphML to an edge list");
  std::string convert_in, convert_out, convert_attr = "length";
  double convert_scale = 1.0;
  convert->add_option("--graphml", convert_in, "Input GraphML")->required();
  convert->add_option("--length-attr", convert_attr, "Edge length attribute");
  convert->add_option("--unit-scale", convert_scale, "Multiplier to km (0.001 for metres)");
  convert->add_option("-o,--output", convert_out, "Output edge list (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (solve->parsed()) {
      return run_solve(problem_path, solve_graph, solve_args, solve_trucks, solve_drones, solve_seed, solve_approach,
                       solve_out);
    }
    if (bench_cmd->parsed()) {
      bench::TrialConfig base;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open '" + config_path + "'");
        base = bench::read_config(in, std::filesystem::path(config_path).parent_path().string());
      }
      // Flags override the config file.
      if (bench_graph.given()) base.graph = bench_graph.source();
      if (*o_trucks) base.trucks = cfg.trucks;
      if (*o_drones) base.drones = cfg.drones;
      if (*o_cap) base.capacity = cfg.capacity;
      if (*o_trials) base.trials = cfg.trials;
      if (*o_seed) base.seed = cfg.seed;
      if (*o_w) base.limits.w = cfg.limits.w;
      if (*o_k) base.max_hops = cfg.max_hops;
      if (*o_timeout) base.limits.wall_timeout_s = cfg.limits.wall_timeout_s;
      if (*o_ct) base.limits.conflict_threshold = cfg.limits.conflict_threshold;
      if (!bench_discount.empty()) base.discount = stage1::parse_discount_kind(bench_discount);
      if (workers >= 0) base.workers = workers;
      if (!approaches.empty()) {
        base.approaches.clear();
        for (const auto& a : approaches) base.approaches.push_back(bench::parse_approach(a));
      }
      bench::check_config(base);
      auto results = bench::run_benchmark(base);
      auto rows = bench::summarize(base, results);
      emit(bench_out, [&](std::ostream& out) { out << bench::export_rows(rows, bench::parse_format(format)); });
      if (!per_trial_out.empty()) {
        emit(per_trial_out, [&](std::ostream& out) { out << bench::export_trials(results); });
      }
      for (const auto& r : rows) {
        for (const auto& note : r.notes) std::cerr << bench::to_string(r.approach) << ": " << note << '\n';
      }
      return kExitOk;
    }
    if (gen->parsed()) {
      auto g = gen_grid(rows, cols, edge_km, gen_seed, jitter);
      emit(gen_out, [&](std::ostream& out) { write_edgelist(out, g); });
      return kExitOk;
    }
    if (validate->parsed()) {
      if (!validate_graph.given()) throw std::invalid_argument("validate needs a graph option");
      std::ifstream in(solution_path);
      if (!in) throw std::runtime_error("cannot open '" + solution_path + "'");
      auto sol = io::read_solution(in);
      pipeline::ProblemSpec spec;
      spec.graph = io::load_graph(validate_graph.source());
      spec.trucks = sol.trucks;
      spec.drones = sol.drones;
      spec.capacity = validate_capacity > 0 ? validate_capacity : std::max(1, sol.meta.capacity);
      auto report = pipeline::validate_solution(spec, sol);
      pipeline::write_report(std::cout, report);
      return report.pass() ? kExitOk : kExitInvalid;
    }
    if (convert->parsed()) {
      std::ifstream in(convert_in);
      if (!in) throw std::runtime_error("cannot open '" + convert_in + "'");
      auto g = load_graphml(in, convert_attr, convert_scale);
      std::cerr << g.num_nodes() << " nodes, " << g.num_edges() << " edges\n";
      emit(convert_out, [&](std::ostream& out) { write_edgelist(out, g); });
      return kExitOk;
    }
  } catch (const pipeline::StageFailed& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitExhausted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
