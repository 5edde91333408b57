#include "tilescope/query.hpp"

#include <cmath>

#include "tilescope/error.hpp"

namespace tilescope {

const char* to_string(AggregateFunc f) {
  switch (f) {
    case AggregateFunc::Count: return "count";
    case AggregateFunc::Sum: return "sum";
    case AggregateFunc::Mean: return "mean";
    case AggregateFunc::Min: return "min";
    case AggregateFunc::Max: return "max";
  }
  return "?";
}

AggregateFunc parse_aggregate_func(std::string_view name) {
  if (name == "count") return AggregateFunc::Count;
  if (name == "sum") return AggregateFunc::Sum;
  if (name == "mean" || name == "avg") return AggregateFunc::Mean;
  if (name == "min") return AggregateFunc::Min;
  if (name == "max") return AggregateFunc::Max;
  throw InvalidArgument("unknown aggregate function '" + std::string(name) + "'");
}

void ExploratoryQuery::validate(const DatasetDescriptor& dataset) const {
  auto check = [](const Interval& i, const char* axis) {
    if (!std::isfinite(i.lo) || !std::isfinite(i.hi)) throw InvalidArgument(std::string(axis) + " interval is not finite");
    if (i.lo > i.hi) throw InvalidArgument(std::string(axis) + " interval has lo > hi");
  };
  check(ix, "x");
  check(iy, "y");
  if (!(eps_max >= 0.0 && eps_max < 1.0)) throw InvalidArgument("eps_max must lie in [0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in (0,1)");
  if (aggs.empty()) throw InvalidArgument("query has no aggregates");
  for (const AggregateSpec& a : aggs) {
    if (a.attribute >= dataset.attributes.size()) {
      throw InvalidArgument("unknown attribute index " + std::to_string(a.attribute));
    }
    if (a.func == AggregateFunc::Count) continue;
    if (!dataset.is_numeric(a.attribute)) {
      throw InvalidArgument("attribute '" + dataset.attributes[a.attribute].name + "' is not numeric");
    }
    if (a.attribute == dataset.axis_x || a.attribute == dataset.axis_y) {
      throw InvalidArgument("aggregates over axis attributes are not supported");
    }
  }
}

void EngineConfig::validate() const {
  if (!(initial_rate > 0.0 && initial_rate <= 1.0)) throw InvalidArgument("initial_rate must lie in (0,1]");
  if (!(rate_floor > 1.0)) throw InvalidArgument("rate_floor must exceed 1");
  if (!(rate_cap >= rate_floor)) throw InvalidArgument("rate_cap must be at least rate_floor");
  if (min_batch < 2) throw InvalidArgument("min_batch must be at least 2");
  if (split_threshold < 4) throw InvalidArgument("split_threshold must be at least 4");
  if (max_depth < 1) throw InvalidArgument("max_depth must be at least 1");
}

}  // namespace tilescope
