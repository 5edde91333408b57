#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "tilescope/adaptation.hpp"
#include "tilescope/query.hpp"
#include "tilescope/raw_store.hpp"
#include "tilescope/tile_index.hpp"

namespace tilescope {

// How an overlapping leaf takes part in a query.
//   Case1: fully contained, exact metadata; no file access.
//   Case2: fully contained, sampled metadata; more samples only if needed.
//   Case3: partially contained; sample the objects inside the window.
//   Case4: no metadata yet (e.g. fresh split children); sample.
enum class TileCase { Case1 = 1, Case2 = 2, Case3 = 3, Case4 = 4 };

TileCase classify(const Tile& tile, Containment containment, std::size_t attribute);

// Per-query sampling bookkeeping of one stratum. pool[0, drawn) are the
// objects already read in this query, pool[drawn, end) are still eligible.
struct SamplingState {
  std::vector<std::uint32_t> pool;
  std::size_t drawn = 0;
  std::size_t eligible0 = 0;  // eligible count when the query started
  double rate = 0.0;

  SamplingState() = default;
  explicit SamplingState(std::vector<std::uint32_t> eligible, double initial_rate = 0.0)
      : pool(std::move(eligible)), eligible0(pool.size()), rate(initial_rate) {}

  std::size_t remaining() const { return pool.size() - drawn; }
  std::span<const std::uint32_t> eligible() const { return std::span(pool).subspan(drawn); }
  std::span<const std::uint32_t> drawn_this_query() const { return std::span(pool).first(drawn); }
};

// Uniform draw without replacement of max(min_batch, ceil(rate * eligible0))
// objects in total for this query (at least one more per call while any
// remain). Returns the new positions ascending, i.e. in file-offset order
// since tile objects are kept offset-sorted.
std::vector<std::uint32_t> draw_samples(SamplingState& state, double rate, std::size_t min_batch, std::mt19937_64& rng);

// Multiplicative rate step (eps_current / eps_max)^2 clamped to
// [rate_floor, rate_cap]; the result never exceeds 1.
double adjust_rate(double eps_current, double eps_max, double rate, const EngineConfig& cfg);

enum class PersistScope { FullTile, PartialRegion };

// Folds one sampled object into either the tile (bitmap + stored metadata)
// or the query-local scratch statistics.
void persist_metadata(Tile& tile, std::span<const std::size_t> attributes, std::uint32_t position,
                      std::span<const double> values, PersistScope scope,
                      std::map<std::size_t, TileMetadata>& scratch);

class QueryEngine {
 public:
  QueryEngine(TileIndex& index, RawReader& reader, const EngineConfig& cfg, std::mt19937_64& rng);

  QueryResult execute(const ExploratoryQuery& query);

 private:
  TileIndex& index_;
  RawReader& reader_;
  const EngineConfig& cfg_;
  std::mt19937_64& rng_;
};

}  // namespace tilescope
