#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tandem/io.hpp"
#include "tandem/pipeline.hpp"

namespace tandem::bench {

using mapf::AgentSpec;

enum class Approach { Direct, Ecbs, Pp, Dpp };

const char* to_string(Approach a);
Approach parse_approach(std::string_view name);

struct TrialConfig {
  io::GraphSource graph;
  int trucks = 5;
  int drones = 10;
  int capacity = 5;
  int trials = 20;
  std::uint64_t seed = 0;
  std::vector<Approach> approaches{Approach::Direct, Approach::Ecbs, Approach::Pp};
  mapf::SolverLimits limits;
  int max_hops = 3;
  stage1::DiscountKind discount = stage1::DiscountKind::Tanh;
  // 0 = one worker per hardware thread; 1 disables parallelism.
  int workers = 0;
};

// Throws std::invalid_argument for trials < 1, no approaches, negative counts.
void check_config(const TrialConfig& config);

// Reads a JSON config; unspecified fields keep their defaults.
TrialConfig read_config(std::istream& in, const std::string& base_dir = ".");

struct TrialAgents {
  std::vector<AgentSpec> trucks;  // ids 0..m-1
  std::vector<AgentSpec> drones;  // ids m..m+n-1
};

// Trial t draws from a generator seeded with seed + t. Endpoints are uniform
// over nodes, distinct, and reachable.
std::vector<TrialAgents> gen_trials(const RoadGraph& g, const TrialConfig& config);

enum class TrialStatus { Ok, Timeout, ConflictOverflow, Failed };

const char* to_string(TrialStatus s);

struct ApproachResult {
  Approach approach = Approach::Direct;
  TrialStatus status = TrialStatus::Ok;
  std::optional<double> distance_km;  // present iff status == Ok
  double plan_s = 0.0;
  double stage1_s = 0.0;
  double stage2_s = 0.0;
  double post_s = 0.0;
  std::string detail;
};

struct TrialResult {
  int trial = 0;
  std::vector<ApproachResult> results;  // in config.approaches order
};

pipeline::ProblemSpec make_spec(std::shared_ptr<const RoadGraph> graph, const TrialConfig& config,
                                const TrialAgents& agents, Approach approach);

ApproachResult run_approach(const pipeline::ProblemSpec& spec, Approach approach);

std::vector<TrialResult> run_benchmark(const TrialConfig& config);
std::vector<TrialResult> run_benchmark(std::shared_ptr<const RoadGraph> graph, const TrialConfig& config);

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
};

// Sample standard deviation over sqrt(n); SEM is 0 for n < 2.
MeanSem mean_sem(std::span<const double> values);

struct SummaryRow {
  int trucks = 0;
  int drones = 0;
  int capacity = 0;
  Approach approach = Approach::Direct;
  double mean_km = 0.0;
  double sem_km = 0.0;
  double mean_s = 0.0;
  double sem_s = 0.0;
  int completed = 0;
  int trials = 0;
  bool partial = false;  // some trials did not complete
  std::vector<std::string> notes;
};

std::vector<SummaryRow> summarize(const TrialConfig& config, std::span<const TrialResult> results);

enum class Format { Csv, Markdown };

Format parse_format(std::string_view name);

// Columns: trucks, drones, capacity, approach, mean_km, sem_km, mean_s,
// sem_s, completed, partial_flag.
std::string export_rows(std::span<const SummaryRow> rows, Format format);

// One CSV line per (trial, approach).
std::string export_trials(std::span<const TrialResult> results);

}  // namespace tandem::bench
