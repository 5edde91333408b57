#include "tilescope/tile_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tilescope/error.hpp"

namespace tilescope {

TileIndex::TileIndex(Interval domain_x, Interval domain_y, std::size_t grid_x, std::size_t grid_y)
    : TileIndex(domain_x, domain_y, grid_x, grid_y, false) {}

TileIndex::TileIndex(Interval domain_x, Interval domain_y, std::size_t grid_x, std::size_t grid_y, bool closed)
    : domain_x_(domain_x), domain_y_(domain_y), grid_x_(grid_x), grid_y_(grid_y) {
  if (grid_x == 0 || grid_y == 0) throw InvalidArgument("grid dimensions must be positive");
  if (!(domain_x.lo < domain_x.hi) || !(domain_y.lo < domain_y.hi)) throw InvalidArgument("empty index domain");
  layout(closed);
}

TileIndex TileIndex::covering(Interval bounds_x, Interval bounds_y, std::size_t grid_x, std::size_t grid_y) {
  for (Interval* b : {&bounds_x, &bounds_y}) {
    if (!(b->lo <= b->hi) || !std::isfinite(b->lo) || !std::isfinite(b->hi)) throw InvalidArgument("invalid bounds");
    if (b->lo == b->hi) b->hi = b->lo + 1.0;
  }
  return TileIndex(bounds_x, bounds_y, grid_x, grid_y, true);
}

void TileIndex::layout(bool closed) {
  edges_x_ = edges(domain_x_, grid_x_, closed);
  edges_y_ = edges(domain_y_, grid_y_, closed);
  domain_x_.hi = edges_x_.back();
  domain_y_.hi = edges_y_.back();
  roots_.reserve(grid_x_ * grid_y_);
  for (std::size_t r = 0; r < grid_y_; ++r) {
    for (std::size_t c = 0; c < grid_x_; ++c) {
      roots_.emplace_back(Interval{edges_x_[c], edges_x_[c + 1]}, Interval{edges_y_[r], edges_y_[r + 1]});
    }
  }
}

std::vector<double> TileIndex::edges(const Interval& domain, std::size_t cells, bool closed) {
  std::vector<double> e(cells + 1);
  const double width = (domain.hi - domain.lo) / static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) e[i] = domain.lo + width * static_cast<double>(i);
  e[cells] = closed ? std::nextafter(domain.hi, std::numeric_limits<double>::infinity()) : domain.hi;
  return e;
}

std::optional<std::size_t> TileIndex::cell_of(const std::vector<double>& edges, double v) {
  if (v < edges.front() || v >= edges.back()) return std::nullopt;
  auto it = std::upper_bound(edges.begin(), edges.end(), v);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

Tile* TileIndex::leaf_for(double x, double y) {
  auto c = cell_of(edges_x_, x);
  auto r = cell_of(edges_y_, y);
  if (!c || !r) return nullptr;
  Tile* t = &root(*c, *r);
  while (!t->is_leaf()) {
    Tile* next = nullptr;
    for (Tile& child : t->children) {
      if (child.contains(x, y)) {
        next = &child;
        break;
      }
    }
    if (next == nullptr) return nullptr;
    t = next;
  }
  return t;
}

std::vector<LeafHit> TileIndex::locate_overlapping_leaves(const Interval& qx, const Interval& qy) {
  if (qx.hi < domain_x_.lo || qx.lo >= domain_x_.hi || qy.hi < domain_y_.lo || qy.lo >= domain_y_.hi) return {};
  auto first = [](const std::vector<double>& e, double v) {
    auto it = std::upper_bound(e.begin(), e.end(), v);
    return it == e.begin() ? std::size_t{0} : static_cast<std::size_t>(it - e.begin()) - 1;
  };
  const std::size_t c0 = first(edges_x_, qx.lo), c1 = std::min(first(edges_x_, qx.hi), grid_x_ - 1);
  const std::size_t r0 = first(edges_y_, qy.lo), r1 = std::min(first(edges_y_, qy.hi), grid_y_ - 1);
  std::vector<LeafHit> out;
  for (std::size_t r = r0; r <= r1; ++r) {
    auto row = std::span<Tile>(roots_).subspan(r * grid_x_ + c0, c1 - c0 + 1);
    auto hits = tilescope::locate_overlapping_leaves(row, qx, qy);
    out.insert(out.end(), hits.begin(), hits.end());
  }
  return out;
}

namespace {

template <typename T, typename F>
void visit_leaves(T& tile, F& fn) {
  if (tile.is_leaf()) {
    fn(tile);
    return;
  }
  for (auto& c : tile.children) visit_leaves(c, fn);
}

}  // namespace

void TileIndex::for_each_leaf(const std::function<void(const Tile&)>& fn) const {
  for (const Tile& r : roots_) visit_leaves(r, fn);
}

void TileIndex::for_each_leaf(const std::function<void(Tile&)>& fn) {
  for (Tile& r : roots_) visit_leaves(r, fn);
}

std::size_t TileIndex::leaf_count() const {
  std::size_t n = 0;
  for (const Tile& r : roots_) n += r.leaf_count();
  return n;
}

std::size_t TileIndex::tile_count() const {
  std::size_t n = 0;
  for (const Tile& r : roots_) n += r.tile_count();
  return n;
}

std::size_t TileIndex::object_count() const {
  std::size_t n = 0;
  for_each_leaf([&](const Tile& t) { n += t.objects.size(); });
  return n;
}

}  // namespace tilescope
