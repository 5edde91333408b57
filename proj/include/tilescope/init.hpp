#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tilescope/query.hpp"
#include "tilescope/raw_store.hpp"
#include "tilescope/tile_index.hpp"

namespace tilescope {

struct InitConfig {
  std::size_t grid_x = 100;
  std::size_t grid_y = 100;
  double extra_budget_fraction = 0.20;
  // Attributes that get exact metadata in every tile. Defaults to the
  // aggregate attributes of the first query.
  std::optional<std::vector<std::size_t>> init_attributes;
  // Known axis bounds skip the bounds-discovery pass.
  std::optional<Interval> bounds_x;
  std::optional<Interval> bounds_y;
  ScanOptions scan;

  void validate() const;
};

struct InitOutcome {
  TileIndex index;
  QueryResult first_result;
  InitStats stats;
};

// Builds the grid (plus finer tiles around the first query), assigns every
// object to its leaf with exact metadata and answers the first query exactly,
// all from sequential scans of the file.
InitOutcome initialize(const DatasetDescriptor& dataset, const ExploratoryQuery& q0, const InitConfig& cfg);

// Splits leaves that intersect the first query's window grown to twice its
// width and height, breadth first, while the extra-tile budget allows.
// Returns the number of tiles added (three per split).
std::size_t query_driven_refine(TileIndex& index, const ExploratoryQuery& q0, std::size_t extra_budget);

}  // namespace tilescope
