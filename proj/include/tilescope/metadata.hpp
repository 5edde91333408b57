#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>

namespace tilescope {

// Running statistics over the sampled values of one attribute in one tile.
// With n == 0 the statistics are undefined.
struct TileMetadata {
  std::uint64_t n = 0;
  double sum = 0.0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deltas from the running mean
  double min_seen = std::numeric_limits<double>::infinity();
  double max_seen = -std::numeric_limits<double>::infinity();

  bool empty() const { return n == 0; }
  // Unbiased sample variance; absent for n < 2.
  std::optional<double> sample_variance() const;

  // Welford update. Throws InvalidArgument on a non-finite value, in which
  // case nothing from the batch is absorbed.
  void absorb(std::span<const double> values);
  void absorb(double value);

  // Batch statistics over a complete value set; the reference the online
  // update must agree with.
  static TileMetadata from_values(std::span<const double> values);
};

TileMetadata update_metadata_incremental(TileMetadata meta, std::span<const double> new_values);

}  // namespace tilescope
