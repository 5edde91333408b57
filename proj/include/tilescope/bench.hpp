#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tilescope/init.hpp"
#include "tilescope/json_io.hpp"
#include "tilescope/query.hpp"

namespace tilescope::bench {

// Uniform synthetic CSV: header a0..a{d-1}, every value in value_range.
struct SynthSpec {
  std::uint64_t n_objects = 1'000'000;
  std::size_t n_attributes = 10;
  Interval value_range{0.0, 1000.0};
  std::uint64_t seed = 1;
  int decimals = 4;

  void validate() const;
};

struct FileStats {
  std::uint64_t rows = 0;
  std::uint64_t bytes = 0;
};

FileStats gen_data(const SynthSpec& spec, const std::filesystem::path& out);
DatasetDescriptor synth_descriptor(const std::filesystem::path& path, std::size_t n_attributes);

// A pan sequence: every window is the previous one moved by shift_fraction of
// its width/height along one of eight compass directions. With probability
// trajectory_bias the move follows a heading fixed at seed time, otherwise
// the direction is uniform. Moves that would leave the domain bounce off the
// border (the heading flips on that axis).
struct WorkloadSpec {
  std::size_t n_queries = 100;
  double width = 100.0;
  double height = 100.0;
  double shift_fraction = 0.10;
  double trajectory_bias = 0.6;
  std::optional<int> heading;  // 0 = east, counter-clockwise in 45 degree steps
  std::optional<double> start_x;  // first window center; drawn from the seed by default
  std::optional<double> start_y;
  std::vector<AggregateSpec> aggs{{AggregateFunc::Sum, 2}, {AggregateFunc::Mean, 2}};
  double eps_max = 0.01;
  double gamma = 0.95;
  std::uint64_t seed = 7;

  void validate() const;
};

// Side length giving roughly `target` objects per window on uniform data.
double window_side_for(std::uint64_t n_objects, std::uint64_t target, const Interval& domain);

std::vector<ExploratoryQuery> gen_workload(const WorkloadSpec& spec, const Interval& domain_x,
                                           const Interval& domain_y);

// Exact answers by a plain full scan (own line splitting and strtod, long
// double accumulation). answers[q][k] is absent where the aggregate is
// undefined (mean/min/max of an empty window).
std::vector<std::vector<std::optional<double>>> exact_answers(const DatasetDescriptor& dataset,
                                                              const std::vector<ExploratoryQuery>& queries);

enum class EngineKind { Val, ValS, ValA };
const char* to_string(EngineKind k);
EngineKind parse_engine_kind(const std::string& name);
EngineConfig engine_config_for(EngineKind kind, EngineConfig base);

struct RunConfig {
  DatasetDescriptor dataset;
  std::vector<EngineKind> engines{EngineKind::Val, EngineKind::ValS, EngineKind::ValA};
  std::vector<double> eps_values{0.01};  // the exact engine runs once regardless
  EngineConfig engine;
  InitConfig init;
};

struct ReportRow {
  std::size_t query_id = 0;
  std::string engine;
  double eps_max = 0.0;
  std::size_t agg_index = 0;
  std::string aggregate;
  double elapsed_ms = 0.0;
  std::uint64_t io_reads = 0;
  std::size_t iterations = 0;
  std::optional<double> value;
  double eps_est = 0.0;
  double eps_actual = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::optional<double> exact_value;
  bool covered = false;
  bool exact = false;
};

struct EngineSummary {
  std::string engine;
  double eps_max = 0.0;
  std::size_t queries = 0;
  double init_ms = 0.0;
  double total_ms = 0.0;
  std::uint64_t total_io = 0;
  std::size_t estimated = 0;  // sum/mean rows after the first query
  double coverage = 1.0;
  double within_bound = 1.0;  // fraction of those rows with eps_actual <= eps_max
  double median_eps_actual = 0.0;
  double speedup_vs_exact = 0.0;
  std::string error;
};

struct RunReport {
  std::vector<ReportRow> rows;
  std::vector<EngineSummary> summary;
};

// Runs every engine (and every eps value for the approximate ones) over the
// workload with a fresh index each, scoring against the exact answers.
RunReport run(const RunConfig& cfg, const std::vector<ExploratoryQuery>& workload,
              const std::vector<std::vector<std::optional<double>>>& exact);

// Per-query CSV, summary JSON and plot-ready CSVs. Returns the files written.
std::vector<std::filesystem::path> report(const RunReport& run, const std::filesystem::path& out_dir);

Json to_json(const RunReport& r);
RunReport run_report_from_json(const Json& j);
Json workload_to_json(const std::vector<ExploratoryQuery>& queries);
std::vector<ExploratoryQuery> workload_from_json(const Json& j, const DatasetDescriptor& dataset);

}  // namespace tilescope::bench
