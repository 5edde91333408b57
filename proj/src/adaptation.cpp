#include "tilescope/adaptation.hpp"

#include "tilescope/error.hpp"

namespace tilescope {

void SplitPolicy::validate() const {
  if (threshold < 4) throw InvalidArgument("split threshold must be at least 4");
  if (max_depth < 1) throw InvalidArgument("max_depth must be at least 1");
}

namespace {

void split_recursive(Tile& tile, const Interval& qx, const Interval& qy, const SplitPolicy& policy,
                     SplitOutcome& out, bool is_new) {
  const bool eligible = tile.is_leaf() && tile.objects.size() > policy.threshold && tile.depth < policy.max_depth &&
                        containment(tile, qx, qy) != Containment::None;
  if (!eligible || !tile.split()) {
    if (is_new) out.new_leaves.push_back(&tile);
    return;
  }
  ++out.splits;
  for (Tile& child : tile.children) {
    if (containment(child, qx, qy) != Containment::None) {
      split_recursive(child, qx, qy, policy, out, true);
    } else {
      out.new_leaves.push_back(&child);
    }
  }
}

}  // namespace

SplitOutcome maybe_split(Tile& tile, const Interval& qx, const Interval& qy, const SplitPolicy& policy) {
  SplitOutcome out;
  if (!tile.is_leaf()) return out;
  split_recursive(tile, qx, qy, policy, out, false);
  return out;
}

}  // namespace tilescope
