#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>

#include "tandem/pipeline.hpp"

namespace tandem::io {

inline constexpr const char* kSolutionMagic = "tandem-solution";
inline constexpr int kSolutionVersion = 1;

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Sections in order: [agents] [paths] [cost] [metadata]. Reals are written
// with 17 significant digits so a read-back is bit-identical.
void write_solution(std::ostream& out, const pipeline::GlobalSolution& sol);
pipeline::GlobalSolution read_solution(std::istream& in);

struct GraphSource {
  enum class Kind { EdgeList, GraphML, Grid } kind = Kind::Grid;
  std::string path;
  std::string length_attr = "length";
  double unit_scale = 1.0;
  int rows = 10;
  int cols = 10;
  double edge_km = 1.0;
  std::uint64_t seed = 0;
  double jitter = 0.0;
};

std::shared_ptr<const RoadGraph> load_graph(const GraphSource& source);

// JSON problem description; see README for the schema. Relative graph paths
// resolve against `base_dir`.
pipeline::ProblemSpec read_problem(std::istream& in, const std::string& base_dir = ".");

}  // namespace tandem::io
