#include "tilescope/explorer.hpp"

namespace tilescope {

Explorer::Explorer(DatasetDescriptor dataset, EngineConfig engine_cfg, InitConfig init_cfg)
    : engine_cfg_(engine_cfg), init_cfg_(std::move(init_cfg)), reader_(std::move(dataset)), rng_(engine_cfg.rng_seed) {
  engine_cfg_.validate();
  init_cfg_.validate();
}

QueryResult Explorer::query(const ExploratoryQuery& q) {
  if (!index_) {
    InitOutcome out = initialize(reader_.dataset(), q, init_cfg_);
    index_.emplace(std::move(out.index));
    init_stats_ = out.stats;
    return std::move(out.first_result);
  }
  QueryEngine engine(*index_, reader_, engine_cfg_, rng_);
  return engine.execute(q);
}

}  // namespace tilescope
