#include "tilescope/tile.hpp"

#include <array>

#include "tilescope/error.hpp"

namespace tilescope {

const char* to_string(Containment c) {
  switch (c) {
    case Containment::None: return "none";
    case Containment::Partial: return "partial";
    case Containment::Full: return "full";
  }
  return "?";
}

const char* to_string(MetadataStatus s) {
  switch (s) {
    case MetadataStatus::Exact: return "exact";
    case MetadataStatus::Approximate: return "approximate";
    case MetadataStatus::NotAvailable: return "not_available";
  }
  return "?";
}

void Bitmap::assign(std::size_t size, bool value) {
  size_ = size;
  words_.assign((size + 63) / 64, value ? ~std::uint64_t{0} : 0);
  if (value && size % 64 != 0) words_.back() = (std::uint64_t{1} << (size % 64)) - 1;
  ones_ = value ? size : 0;
}

bool Bitmap::set(std::size_t i) {
  std::uint64_t& w = words_[i / 64];
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (w & mask) return false;
  w |= mask;
  ++ones_;
  return true;
}

const TileMetadata* Tile::find_metadata(std::size_t attribute) const {
  auto it = metadata.find(attribute);
  return it == metadata.end() ? nullptr : &it->second;
}

void Tile::reset_tracking(std::span<const std::size_t> attributes) {
  metadata.clear();
  for (std::size_t a : attributes) metadata[a] = TileMetadata{};
  bitmap.assign(objects.size(), false);
}

void Tile::absorb_sample(std::size_t i, std::span<const std::size_t> attributes, std::span<const double> values) {
  if (!bitmap.set(i)) throw InvalidArgument("object already sampled in this tile");
  for (std::size_t k = 0; k < attributes.size(); ++k) {
    auto it = metadata.find(attributes[k]);
    if (it != metadata.end()) it->second.absorb(values[k]);
  }
}

void Tile::set_exact(std::size_t attribute, const TileMetadata& meta) {
  metadata[attribute] = meta;
  bitmap.assign(objects.size(), true);
}

bool Tile::split() {
  const double mx = ix.lo + (ix.hi - ix.lo) / 2;
  const double my = iy.lo + (iy.hi - iy.lo) / 2;
  if (!(ix.lo < mx && mx < ix.hi && iy.lo < my && my < iy.hi)) return false;
  children.reserve(4);
  children.emplace_back(Interval{ix.lo, mx}, Interval{iy.lo, my}, depth + 1);
  children.emplace_back(Interval{mx, ix.hi}, Interval{iy.lo, my}, depth + 1);
  children.emplace_back(Interval{ix.lo, mx}, Interval{my, iy.hi}, depth + 1);
  children.emplace_back(Interval{mx, ix.hi}, Interval{my, iy.hi}, depth + 1);
  for (const ObjectEntry& o : objects) {
    const std::size_t q = (o.x < mx ? 0 : 1) + (o.y < my ? 0 : 2);
    children[q].objects.push_back(o);
  }
  for (Tile& c : children) c.bitmap.assign(c.objects.size(), false);
  objects = {};
  bitmap = {};
  metadata.clear();
  return true;
}

std::size_t Tile::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const Tile& c : children) n += c.leaf_count();
  return n;
}

std::size_t Tile::tile_count() const {
  std::size_t n = 1;
  for (const Tile& c : children) n += c.tile_count();
  return n;
}

Containment containment(const Tile& tile, const Interval& qx, const Interval& qy) {
  auto overlaps = [](const Interval& t, const Interval& q) { return t.lo < t.hi && q.lo < t.hi && t.lo <= q.hi; };
  if (!overlaps(tile.ix, qx) || !overlaps(tile.iy, qy)) return Containment::None;
  auto within = [](const Interval& t, const Interval& q) { return q.lo <= t.lo && t.hi <= q.hi; };
  return within(tile.ix, qx) && within(tile.iy, qy) ? Containment::Full : Containment::Partial;
}

std::vector<std::uint32_t> objects_in_region(const Tile& tile, const Interval& qx, const Interval& qy) {
  std::vector<std::uint32_t> out;
  const Containment c = containment(tile, qx, qy);
  if (c == Containment::None) return out;
  out.reserve(tile.objects.size());
  for (std::uint32_t i = 0; i < tile.objects.size(); ++i) {
    const ObjectEntry& o = tile.objects[i];
    if (c == Containment::Full || (qx.contains_closed(o.x) && qy.contains_closed(o.y))) out.push_back(i);
  }
  return out;
}

MetadataStatus metadata_status(const Tile& tile, std::size_t attribute) {
  const TileMetadata* m = tile.find_metadata(attribute);
  if (m == nullptr) return MetadataStatus::NotAvailable;
  if (tile.objects.empty()) return MetadataStatus::Exact;
  if (m->n == 0) return MetadataStatus::NotAvailable;
  return tile.bitmap.all() ? MetadataStatus::Exact : MetadataStatus::Approximate;
}

namespace {

void descend(Tile& tile, const Interval& qx, const Interval& qy, bool under_full, std::vector<LeafHit>& out) {
  Containment c = under_full ? Containment::Full : containment(tile, qx, qy);
  if (c == Containment::None) return;
  if (tile.is_leaf()) {
    out.push_back({&tile, c});
    return;
  }
  for (Tile& child : tile.children) descend(child, qx, qy, c == Containment::Full, out);
}

}  // namespace

std::vector<LeafHit> locate_overlapping_leaves(std::span<Tile> roots, const Interval& qx, const Interval& qy) {
  std::vector<LeafHit> out;
  for (Tile& r : roots) descend(r, qx, qy, false, out);
  return out;
}

}  // namespace tilescope
