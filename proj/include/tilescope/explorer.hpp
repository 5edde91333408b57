#pragma once

#include <memory>
#include <optional>
#include <random>

#include "tilescope/engine.hpp"
#include "tilescope/init.hpp"

namespace tilescope {

// One exploration session over a raw file: the index is built while answering
// the first query and then adapts to every following query.
class Explorer {
 public:
  Explorer(DatasetDescriptor dataset, EngineConfig engine_cfg = {}, InitConfig init_cfg = {});

  QueryResult query(const ExploratoryQuery& q);

  bool initialized() const { return index_.has_value(); }
  const TileIndex* index() const { return index_ ? &*index_ : nullptr; }
  TileIndex* index() { return index_ ? &*index_ : nullptr; }
  const std::optional<InitStats>& init_stats() const { return init_stats_; }
  const DatasetDescriptor& dataset() const { return reader_.dataset(); }
  const EngineConfig& engine_config() const { return engine_cfg_; }
  RawReader& reader() { return reader_; }

 private:
  EngineConfig engine_cfg_;
  InitConfig init_cfg_;
  RawReader reader_;
  std::mt19937_64 rng_;
  std::optional<TileIndex> index_;
  std::optional<InitStats> init_stats_;
};

}  // namespace tilescope
