#include "tandem/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <istream>
#include <random>
#include <sstream>
#include <thread>

#include "json_sources.hpp"

namespace tandem::bench {

const char* to_string(Approach a) {
  switch (a) {
    case Approach::Direct: return "direct";
    case Approach::Ecbs: return "ecbs";
    case Approach::Pp: return "pp";
    case Approach::Dpp: return "dpp";
  }
  return "unknown";
}

Approach parse_approach(std::string_view name) {
  for (auto a : {Approach::Direct, Approach::Ecbs, Approach::Pp, Approach::Dpp}) {
    if (name == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown approach '" + std::string(name) + "'");
}

const char* to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::Ok: return "ok";
    case TrialStatus::Timeout: return "timeout";
    case TrialStatus::ConflictOverflow: return "conflict_overflow";
    case TrialStatus::Failed: return "failed";
  }
  return "unknown";
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "markdown" || name == "md") return Format::Markdown;
  throw std::invalid_argument("unknown format '" + std::string(name) + "'");
}

void check_config(const TrialConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (config.approaches.empty()) throw std::invalid_argument("at least one approach is required");
  if (config.trucks < 0 || config.drones < 0) throw std::invalid_argument("agent counts must be nonnegative");
  if (config.capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  if (config.max_hops < 1) throw std::invalid_argument("K must be >= 1");
  if (!(config.limits.w >= 1.0)) throw std::invalid_argument("w must be >= 1");
}

TrialConfig read_config(std::istream& in, const std::string& base_dir) {
  using nlohmann::json;
  TrialConfig c;
  try {
    json j = json::parse(in);
    if (j.contains("graph")) c.graph = io::internal::parse_graph_source(j.at("graph"), base_dir);
    c.trucks = j.value("trucks", c.trucks);
    c.drones = j.value("drones", c.drones);
    c.capacity = j.value("capacity", c.capacity);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    if (j.contains("approaches")) {
      c.approaches.clear();
      for (const auto& a : j.at("approaches")) c.approaches.push_back(parse_approach(a.get<std::string>()));
    }
    c.limits.w = j.value("w", c.limits.w);
    c.limits.wall_timeout_s = j.value("timeout_s", c.limits.wall_timeout_s);
    c.limits.conflict_threshold = j.value("conflict_threshold", c.limits.conflict_threshold);
    c.max_hops = j.value("k_hops", c.max_hops);
    c.discount = stage1::parse_discount_kind(j.value("discount", std::string("tanh")));
    c.workers = j.value("workers", c.workers);
  } catch (const json::exception& err) {
    throw io::FormatError(std::string("bench config: ") + err.what(), 0);
  }
  check_config(c);
  return c;
}

namespace {

std::vector<char> reachable_from(const RoadGraph& g, NodeId src) {
  std::vector<char> seen(g.num_nodes(), 0);
  std::deque<NodeId> queue{src};
  seen[static_cast<std::size_t>(src)] = 1;
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    for (EdgeId e : g.out_edges(v)) {
      NodeId u = g.edge(e).dest;
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        queue.push_back(u);
      }
    }
  }
  return seen;
}

AgentSpec draw_agent(const RoadGraph& g, std::mt19937_64& rng, mapf::AgentId id, mapf::AgentKind kind) {
  constexpr int kMaxAttempts = 1000;
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(g.num_nodes() - 1));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    NodeId s = pick(rng);
    NodeId t = pick(rng);
    if (s == t) continue;
    if (!reachable_from(g, s)[static_cast<std::size_t>(t)]) continue;
    return {id, kind, s, t};
  }
  throw std::runtime_error("could not draw a reachable start/goal pair after " + std::to_string(kMaxAttempts) +
                           " attempts; graph too disconnected");
}

}  // namespace

std::vector<TrialAgents> gen_trials(const RoadGraph& g, const TrialConfig& config) {
  check_config(config);
  if (g.num_nodes() < 2) throw std::invalid_argument("graph needs at least 2 nodes");
  std::vector<TrialAgents> out;
  for (int t = 0; t < config.trials; ++t) {
    std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(t));
    TrialAgents agents;
    for (int i = 0; i < config.trucks; ++i) agents.trucks.push_back(draw_agent(g, rng, i, mapf::AgentKind::Truck));
    for (int i = 0; i < config.drones; ++i) {
      agents.drones.push_back(draw_agent(g, rng, config.trucks + i, mapf::AgentKind::Drone));
    }
    out.push_back(std::move(agents));
  }
  return out;
}

pipeline::ProblemSpec make_spec(std::shared_ptr<const RoadGraph> graph, const TrialConfig& config,
                                const TrialAgents& agents, Approach approach) {
  pipeline::ProblemSpec spec;
  spec.graph = std::move(graph);
  spec.trucks = agents.trucks;
  spec.drones = agents.drones;
  spec.capacity = config.capacity;
  spec.max_hops = config.max_hops;
  spec.discount = config.discount;
  spec.limits = config.limits;
  auto solver = approach == Approach::Ecbs ? mapf::SolverKind::Ecbs : mapf::SolverKind::Pp;
  spec.stage1_solver = solver;
  spec.stage2_solver = solver;
  return spec;
}

ApproachResult run_approach(const pipeline::ProblemSpec& spec, Approach approach) {
  ApproachResult r;
  r.approach = approach;
  auto t0 = std::chrono::steady_clock::now();
  try {
    pipeline::GlobalSolution sol;
    switch (approach) {
      case Approach::Direct: sol = pipeline::solve_direct(spec); break;
      case Approach::Dpp: sol = pipeline::solve_dpp(spec); break;
      case Approach::Ecbs:
      case Approach::Pp: sol = pipeline::solve(spec); break;
    }
    r.status = TrialStatus::Ok;
    r.distance_km = sol.cost.grand_total;
    r.stage1_s = sol.meta.stage1_s;
    r.stage2_s = sol.meta.stage2_s;
    r.post_s = sol.meta.post_s;
    if (sol.meta.fell_back_to_direct) r.detail = "fell back to direct";
  } catch (const pipeline::StageFailed& err) {
    switch (err.cause()) {
      case mapf::SolveStatus::Timeout: r.status = TrialStatus::Timeout; break;
      case mapf::SolveStatus::ConflictOverflow: r.status = TrialStatus::ConflictOverflow; break;
      default: r.status = TrialStatus::Failed; break;
    }
    r.detail = err.what();
  } catch (const std::exception& err) {
    r.status = TrialStatus::Failed;
    r.detail = err.what();
  }
  r.plan_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<TrialResult> run_benchmark(const TrialConfig& config) {
  return run_benchmark(io::load_graph(config.graph), config);
}

std::vector<TrialResult> run_benchmark(std::shared_ptr<const RoadGraph> graph, const TrialConfig& config) {
  auto trials = gen_trials(*graph, config);
  std::vector<TrialResult> results(trials.size());
  auto run_trial = [&](std::size_t t) {
    TrialResult tr;
    tr.trial = static_cast<int>(t);
    for (auto approach : config.approaches) {
      tr.results.push_back(run_approach(make_spec(graph, config, trials[t], approach), approach));
    }
    results[t] = std::move(tr);
  };

  unsigned workers = config.workers > 0 ? static_cast<unsigned>(config.workers) : std::thread::hardware_concurrency();
  workers = std::clamp(workers, 1u, static_cast<unsigned>(trials.size()));
  if (workers == 1) {
    for (std::size_t t = 0; t < trials.size(); ++t) run_trial(t);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < trials.size(); t = next++) run_trial(t);
    });
  }
  pool.clear();
  return results;
}

MeanSem mean_sem(std::span<const double> values) {
  MeanSem out;
  if (values.empty()) return {std::nan(""), std::nan("")};
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double n = static_cast<double>(values.size());
  out.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

std::vector<SummaryRow> summarize(const TrialConfig& config, std::span<const TrialResult> results) {
  std::vector<SummaryRow> rows;
  for (std::size_t k = 0; k < config.approaches.size(); ++k) {
    SummaryRow row;
    row.trucks = config.trucks;
    row.drones = config.drones;
    row.capacity = config.capacity;
    row.approach = config.approaches[k];
    row.trials = static_cast<int>(results.size());
    std::vector<double> km;
    std::vector<double> secs;
    for (const auto& tr : results) {
      if (k >= tr.results.size()) continue;
      const auto& r = tr.results[k];
      if (r.status != TrialStatus::Ok || !r.distance_km) continue;
      km.push_back(*r.distance_km);
      secs.push_back(r.plan_s);
    }
    row.completed = static_cast<int>(km.size());
    row.partial = row.completed < row.trials;
    auto d = mean_sem(km);
    auto s = mean_sem(secs);
    row.mean_km = d.mean;
    row.sem_km = d.sem;
    row.mean_s = s.mean;
    row.sem_s = s.sem;
    if (row.completed == 1) row.notes.push_back("single completed trial: SEM undefined, reported as 0");
    if (row.completed == 0) row.notes.push_back("no completed trials");
    if (row.completed > 1 && row.sem_km > 0.05 * row.mean_km) {
      row.notes.push_back("distance SEM exceeds 5% of the mean");
    }
    if (row.partial) {
      row.notes.push_back(std::to_string(row.trials - row.completed) + " of " + std::to_string(row.trials) +
                          " trials did not complete");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string export_rows(std::span<const SummaryRow> rows, Format format) {
  std::ostringstream out;
  if (format == Format::Csv) {
    out << "trucks,drones,capacity,approach,mean_km,sem_km,mean_s,sem_s,completed,partial_flag\n";
    for (const auto& r : rows) {
      out << r.trucks << ',' << r.drones << ',' << r.capacity << ',' << to_string(r.approach) << ','
          << fixed(r.mean_km, 6) << ',' << fixed(r.sem_km, 6) << ',' << fixed(r.mean_s, 4) << ','
          << fixed(r.sem_s, 4) << ',' << r.completed << ',' << (r.partial ? 1 : 0) << '\n';
    }
    return out.str();
  }
  out << "| trucks | drones | capacity | approach | mean_km | sem_km | mean_s | sem_s | completed | partial_flag |\n";
  out << "|---:|---:|---:|:---|---:|---:|---:|---:|---:|:---:|\n";
  for (const auto& r : rows) {
    const char* mark = r.partial ? "*" : "";
    out << "| " << r.trucks << " | " << r.drones << " | " << r.capacity << " | " << to_string(r.approach) << " | "
        << fixed(r.mean_km, 3) << mark << " | " << fixed(r.sem_km, 3) << " | " << fixed(r.mean_s, 3) << mark << " | "
        << fixed(r.sem_s, 3) << " | " << r.completed << " | " << (r.partial ? "*" : "") << " |\n";
  }
  return out.str();
}

std::string export_trials(std::span<const TrialResult> results) {
  std::ostringstream out;
  out << "trial,approach,status,distance_km,plan_s,stage1_s,stage2_s,post_s\n";
  for (const auto& tr : results) {
    for (const auto& r : tr.results) {
      out << tr.trial << ',' << to_string(r.approach) << ',' << to_string(r.status) << ','
          << (r.distance_km ? fixed(*r.distance_km, 6) : std::string()) << ',' << fixed(r.plan_s, 4) << ','
          << fixed(r.stage1_s, 4) << ',' << fixed(r.stage2_s, 4) << ',' << fixed(r.post_s, 4) << '\n';
    }
  }
  return out.str();
}

}  // namespace tandem::bench
