#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "tilescope/tile.hpp"

namespace tilescope {

// Equal-width grid of root tiles over the axis domain, each root the top of a
// quadtree of refinements.
class TileIndex {
 public:
  TileIndex(Interval domain_x, Interval domain_y, std::size_t grid_x, std::size_t grid_y);

  // Grid over closed bounds [lo, hi]: cell edges are spaced over [lo, hi] and
  // only the last row/column is widened by one ulp so hi itself is inside.
  // Degenerate bounds (lo == hi) get unit width.
  static TileIndex covering(Interval bounds_x, Interval bounds_y, std::size_t grid_x, std::size_t grid_y);

  const Interval& domain_x() const { return domain_x_; }
  const Interval& domain_y() const { return domain_y_; }
  std::size_t grid_x() const { return grid_x_; }
  std::size_t grid_y() const { return grid_y_; }

  std::vector<Tile>& roots() { return roots_; }
  const std::vector<Tile>& roots() const { return roots_; }
  Tile& root(std::size_t col, std::size_t row) { return roots_[row * grid_x_ + col]; }

  // Deepest tile containing the point, or nullptr outside the domain.
  Tile* leaf_for(double x, double y);

  // Same contract as the free function, pruning roots with grid arithmetic.
  std::vector<LeafHit> locate_overlapping_leaves(const Interval& qx, const Interval& qy);

  void for_each_leaf(const std::function<void(const Tile&)>& fn) const;
  void for_each_leaf(const std::function<void(Tile&)>& fn);

  std::size_t leaf_count() const;
  std::size_t tile_count() const;
  std::size_t object_count() const;

  // Running total of quadtree splits applied after the grid was laid out.
  std::size_t splits() const { return splits_; }
  void record_splits(std::size_t n) { splits_ += n; }

 private:
  TileIndex(Interval domain_x, Interval domain_y, std::size_t grid_x, std::size_t grid_y, bool closed);
  void layout(bool closed);
  static std::vector<double> edges(const Interval& domain, std::size_t cells, bool closed);
  static std::optional<std::size_t> cell_of(const std::vector<double>& edges, double v);

  Interval domain_x_;
  Interval domain_y_;
  std::size_t grid_x_;
  std::size_t grid_y_;
  std::vector<double> edges_x_;
  std::vector<double> edges_y_;
  std::vector<Tile> roots_;
  std::size_t splits_ = 0;
};

}  // namespace tilescope
