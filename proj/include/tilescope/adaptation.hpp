#pragma once

#include <cstddef>
#include <vector>

#include "tilescope/tile.hpp"

namespace tilescope {

struct SplitPolicy {
  std::size_t threshold = 200;  // a leaf splits when it holds more objects than this
  unsigned max_depth = 12;

  void validate() const;
};

struct SplitOutcome {
  std::size_t splits = 0;
  std::vector<Tile*> new_leaves;
};

// Quadtree adaptation of a leaf that overlaps the query. Children start with
// no metadata; those still overlapping the query and above the threshold are
// split again.
SplitOutcome maybe_split(Tile& tile, const Interval& qx, const Interval& qy, const SplitPolicy& policy);

}  // namespace tilescope
