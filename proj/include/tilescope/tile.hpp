#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "tilescope/metadata.hpp"

namespace tilescope {

// [lo, hi). Tiles use the half-open reading, queries the closed one.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains_half_open(double v) const { return lo <= v && v < hi; }
  bool contains_closed(double v) const { return lo <= v && v <= hi; }
  double width() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Containment { None, Partial, Full };
enum class MetadataStatus { Exact, Approximate, NotAvailable };

const char* to_string(Containment c);
const char* to_string(MetadataStatus s);

class Bitmap {
 public:
  Bitmap() = default;
  explicit Bitmap(std::size_t size, bool value = false) { assign(size, value); }

  void assign(std::size_t size, bool value);
  std::size_t size() const { return size_; }
  std::size_t popcount() const { return ones_; }
  bool all() const { return ones_ == size_; }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  // Returns true when the bit flipped from 0 to 1.
  bool set(std::size_t i);

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
  std::size_t ones_ = 0;
};

struct ObjectEntry {
  double x = 0.0;
  double y = 0.0;
  std::uint64_t offset = 0;
};

// A node of the tile hierarchy. Leaves own their objects (ascending by file
// offset); inner tiles only partition space. One bitmap is shared by every
// tracked attribute, so all metadata entries of a tile have the same n.
struct Tile {
  Interval ix;
  Interval iy;
  unsigned depth = 0;
  std::vector<ObjectEntry> objects;
  Bitmap bitmap;
  std::map<std::size_t, TileMetadata> metadata;  // keyed by attribute; keys are the tracked set
  std::vector<Tile> children;

  Tile() = default;
  Tile(Interval x, Interval y, unsigned d = 0) : ix(x), iy(y), depth(d) {}

  bool is_leaf() const { return children.empty(); }
  bool contains(double x, double y) const { return ix.contains_half_open(x) && iy.contains_half_open(y); }
  bool tracks(std::size_t attribute) const { return metadata.contains(attribute); }
  const TileMetadata* find_metadata(std::size_t attribute) const;

  // Starts tracking exactly `attributes`: clears the bitmap and every metadata
  // entry so all tracked attributes are sampled together from scratch.
  void reset_tracking(std::span<const std::size_t> attributes);

  // Marks object i sampled and folds its values into the tracked metadata.
  // values[k] belongs to attributes[k]; attributes must cover the tracked set.
  void absorb_sample(std::size_t i, std::span<const std::size_t> attributes, std::span<const double> values);

  // Declares every object sampled with the given exact statistics.
  void set_exact(std::size_t attribute, const TileMetadata& meta);

  // Quadtree split at the interval midpoints. Objects move to the children in
  // offset order; the parent's objects, bitmap and metadata are dropped.
  // Returns false (and leaves the tile alone) when the rectangle is too small
  // to halve.
  bool split();

  std::size_t leaf_count() const;
  std::size_t tile_count() const;
};

Containment containment(const Tile& tile, const Interval& qx, const Interval& qy);

// Positions in tile.objects whose axis values lie in qx x qy (closed).
std::vector<std::uint32_t> objects_in_region(const Tile& tile, const Interval& qx, const Interval& qy);

MetadataStatus metadata_status(const Tile& tile, std::size_t attribute);

struct LeafHit {
  Tile* tile = nullptr;
  Containment containment = Containment::None;
};

// Leaves intersecting the query rectangle. A leaf below a fully contained
// ancestor is reported Full.
std::vector<LeafHit> locate_overlapping_leaves(std::span<Tile> roots, const Interval& qx, const Interval& qy);

}  // namespace tilescope
