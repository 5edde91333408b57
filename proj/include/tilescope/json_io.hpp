#pragma once

#include "json.hpp"
#include "tilescope/init.hpp"
#include "tilescope/query.hpp"
#include "tilescope/raw_store.hpp"
#include "tilescope/tile_index.hpp"

namespace tilescope {

using Json = nlohmann::json;

// Parsers throw InvalidArgument on malformed documents. Config parsers start
// from `base` and override only the fields present.

Json to_json(const DatasetDescriptor& d);
DatasetDescriptor dataset_from_json(const Json& j);

Json to_json(const EngineConfig& c);
EngineConfig engine_config_from_json(const Json& j, EngineConfig base = {});

Json to_json(const InitConfig& c);
InitConfig init_config_from_json(const Json& j, InitConfig base = {});

Json to_json(const Interval& i);
Interval interval_from_json(const Json& j);

Json to_json(const ExploratoryQuery& q);
// Aggregate attributes may be given by index or by name.
ExploratoryQuery query_from_json(const Json& j, const DatasetDescriptor& dataset);

Json to_json(const InitStats& s);
Json to_json(const QueryResult& r);

// Snapshot of the tile layout for overlays and debugging.
Json index_stats_json(const TileIndex& index, const DatasetDescriptor& dataset);

}  // namespace tilescope
