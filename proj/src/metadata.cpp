#include "tilescope/metadata.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tilescope/error.hpp"

namespace tilescope {

std::optional<double> TileMetadata::sample_variance() const {
  if (n < 2) return std::nullopt;
  return m2 / static_cast<double>(n - 1);
}

void TileMetadata::absorb(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("non-finite value " + std::to_string(value));
  ++n;
  sum += value;
  const double delta = value - mean;
  mean += delta / static_cast<double>(n);
  m2 += delta * (value - mean);
  min_seen = std::min(min_seen, value);
  max_seen = std::max(max_seen, value);
}

void TileMetadata::absorb(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite value " + std::to_string(v));
  }
  for (double v : values) absorb(v);
}

TileMetadata TileMetadata::from_values(std::span<const double> values) {
  TileMetadata m;
  if (values.empty()) return m;
  m.n = values.size();
  for (double v : values) {
    m.sum += v;
    m.min_seen = std::min(m.min_seen, v);
    m.max_seen = std::max(m.max_seen, v);
  }
  m.mean = m.sum / static_cast<double>(m.n);
  for (double v : values) m.m2 += (v - m.mean) * (v - m.mean);
  return m;
}

TileMetadata update_metadata_incremental(TileMetadata meta, std::span<const double> new_values) {
  meta.absorb(new_values);
  return meta;
}

}  // namespace tilescope
