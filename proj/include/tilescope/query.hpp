#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tilescope/estimator.hpp"
#include "tilescope/raw_store.hpp"
#include "tilescope/tile.hpp"

namespace tilescope {

enum class AggregateFunc { Count, Sum, Mean, Min, Max };

const char* to_string(AggregateFunc f);
AggregateFunc parse_aggregate_func(std::string_view name);

struct AggregateSpec {
  AggregateFunc func = AggregateFunc::Sum;
  std::size_t attribute = 0;
  friend bool operator==(const AggregateSpec&, const AggregateSpec&) = default;
};

// A 2D window (closed on both axes) with the aggregates to compute, the
// accepted relative error and the confidence level.
struct ExploratoryQuery {
  Interval ix;
  Interval iy;
  std::vector<AggregateSpec> aggs;
  double eps_max = 0.0;
  double gamma = 0.95;

  void validate(const DatasetDescriptor& dataset) const;
};

struct AggregateResult {
  AggregateSpec spec;
  std::optional<Estimate> estimate;  // absent when error is set
  bool exact = false;                // every contributing stratum fully read
  std::string error;
};

struct InitStats {
  double elapsed_ms = 0.0;
  std::uint64_t objects_scanned = 0;
  std::uint64_t rows_rejected = 0;
  std::size_t file_passes = 0;
  std::size_t tiles = 0;
  std::size_t extra_tiles = 0;
};

struct QueryStats {
  std::uint64_t io_reads = 0;
  std::size_t sampling_iterations = 0;
  std::size_t tiles_full = 0;
  std::size_t tiles_partial = 0;
  std::size_t tiles_split = 0;
  std::size_t case_counts[4] = {0, 0, 0, 0};
  std::uint64_t region_objects = 0;
  double elapsed_ms = 0.0;
};

struct QueryResult {
  std::vector<AggregateResult> aggregates;
  QueryStats stats;
  std::optional<InitStats> init;  // set on the query that built the index
};

struct EngineConfig {
  double initial_rate = 0.05;
  double rate_cap = 2.0;
  double rate_floor = 1.1;
  std::size_t min_batch = 50;
  std::size_t split_threshold = 200;
  unsigned max_depth = 12;
  std::uint64_t rng_seed = 42;
  bool adapt = true;
  // Keep sampled statistics of fully contained tiles in the index and reuse
  // them across queries. Off for the sampling-only baseline.
  bool reuse_metadata = true;
  // Ignore the query's error bound and always compute exact answers.
  bool exact_only = false;

  void validate() const;
};

}  // namespace tilescope
