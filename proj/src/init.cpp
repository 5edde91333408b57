#include "tilescope/init.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

#include "tilescope/error.hpp"

namespace tilescope {

void InitConfig::validate() const {
  if (grid_x < 1 || grid_y < 1) throw InvalidArgument("grid dimensions must be at least 1");
  if (!(extra_budget_fraction >= 0.0)) throw InvalidArgument("extra_budget_fraction must be non-negative");
  for (const auto& b : {bounds_x, bounds_y}) {
    if (b && !(b->lo <= b->hi)) throw InvalidArgument("bounds must satisfy lo <= hi");
  }
}

std::size_t query_driven_refine(TileIndex& index, const ExploratoryQuery& q0, std::size_t extra_budget) {
  const double cx = q0.ix.lo + q0.ix.width() / 2, cy = q0.iy.lo + q0.iy.width() / 2;
  const Interval ex{cx - q0.ix.width(), cx + q0.ix.width()};
  const Interval ey{cy - q0.iy.width(), cy + q0.iy.width()};

  std::deque<Tile*> queue;
  for (const LeafHit& h : index.locate_overlapping_leaves(ex, ey)) queue.push_back(h.tile);
  std::size_t added = 0;
  while (!queue.empty() && added + 3 <= extra_budget) {
    Tile* t = queue.front();
    queue.pop_front();
    if (!t->is_leaf() || !t->split()) continue;
    added += 3;
    for (Tile& c : t->children) {
      if (containment(c, ex, ey) != Containment::None) queue.push_back(&c);
    }
  }
  return added;
}

namespace {

Estimate exact_value(double v) {
  Estimate e;
  e.value = e.ci_lo = e.ci_hi = v;
  return e;
}

AggregateResult exact_result(const AggregateSpec& spec, std::uint64_t count, const TileMetadata* meta) {
  AggregateResult r;
  r.spec = spec;
  r.exact = true;
  switch (spec.func) {
    case AggregateFunc::Count:
      r.estimate = exact_value(static_cast<double>(count));
      break;
    case AggregateFunc::Sum:
      r.estimate = exact_value(meta->sum);
      break;
    case AggregateFunc::Mean:
      if (count == 0) {
        r.error = "mean over an empty region";
      } else {
        r.estimate = exact_value(meta->sum / static_cast<double>(count));
      }
      break;
    case AggregateFunc::Min:
    case AggregateFunc::Max:
      if (count == 0) {
        r.error = std::string(to_string(spec.func)) + " over an empty region";
      } else {
        r.estimate = exact_value(spec.func == AggregateFunc::Min ? meta->min_seen : meta->max_seen);
      }
      break;
  }
  return r;
}

}  // namespace

InitOutcome initialize(const DatasetDescriptor& dataset, const ExploratoryQuery& q0, const InitConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  dataset.validate();
  q0.validate(dataset);
  cfg.validate();

  std::vector<std::size_t> init_attrs;
  if (cfg.init_attributes) {
    init_attrs = *cfg.init_attributes;
  } else {
    for (const auto& a : q0.aggs) {
      if (a.func != AggregateFunc::Count) init_attrs.push_back(a.attribute);
    }
  }
  std::sort(init_attrs.begin(), init_attrs.end());
  init_attrs.erase(std::unique(init_attrs.begin(), init_attrs.end()), init_attrs.end());
  for (std::size_t a : init_attrs) {
    if (!dataset.is_numeric(a) || a == dataset.axis_x || a == dataset.axis_y) {
      throw InvalidArgument("init attribute " + std::to_string(a) + " must be numeric and non-axis");
    }
  }

  InitStats stats;
  Interval bx, by;
  if (cfg.bounds_x && cfg.bounds_y) {
    bx = *cfg.bounds_x;
    by = *cfg.bounds_y;
  } else {
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    auto r = scan(dataset, {}, [&](const ObjectRecord& rec) {
      min_x = std::min(min_x, rec.x);
      max_x = std::max(max_x, rec.x);
      min_y = std::min(min_y, rec.y);
      max_y = std::max(max_y, rec.y);
    }, cfg.scan);
    ++stats.file_passes;
    if (r.records == 0) throw Error("dataset has no numeric rows");
    bx = cfg.bounds_x.value_or(Interval{min_x, max_x});
    by = cfg.bounds_y.value_or(Interval{min_y, max_y});
  }

  InitOutcome out{TileIndex::covering(bx, by, cfg.grid_x, cfg.grid_y), {}, {}};
  TileIndex& index = out.index;
  const auto budget = static_cast<std::size_t>(std::floor(cfg.extra_budget_fraction *
                                                          static_cast<double>(cfg.grid_x * cfg.grid_y)));
  stats.extra_tiles = query_driven_refine(index, q0, budget);

  std::vector<std::size_t> wanted = init_attrs;
  for (const auto& a : q0.aggs) {
    if (a.func != AggregateFunc::Count) wanted.push_back(a.attribute);
  }
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  auto slot_of = [&](std::size_t attr) {
    return static_cast<std::size_t>(std::lower_bound(wanted.begin(), wanted.end(), attr) - wanted.begin());
  };
  std::vector<std::size_t> init_slots;
  for (std::size_t a : init_attrs) init_slots.push_back(slot_of(a));

  std::uint64_t q0_count = 0;
  std::vector<TileMetadata> q0_meta(wanted.size());
  std::uint64_t outside = 0;
  auto result = scan(dataset, wanted, [&](const ObjectRecord& rec) {
    Tile* leaf = index.leaf_for(rec.x, rec.y);
    if (leaf == nullptr) {
      ++outside;
      return;
    }
    leaf->objects.push_back({rec.x, rec.y, rec.offset});
    for (std::size_t k = 0; k < init_attrs.size(); ++k) leaf->metadata[init_attrs[k]].absorb(rec.values[init_slots[k]]);
    if (q0.ix.contains_closed(rec.x) && q0.iy.contains_closed(rec.y)) {
      ++q0_count;
      for (std::size_t k = 0; k < wanted.size(); ++k) q0_meta[k].absorb(rec.values[k]);
    }
  }, cfg.scan);
  ++stats.file_passes;

  stats.objects_scanned = result.records;
  stats.rows_rejected = result.rejected + outside;
  if (result.records == outside) throw Error("dataset has no numeric rows inside the index domain");

  index.for_each_leaf([&](Tile& t) {
    for (std::size_t a : init_attrs) t.metadata.try_emplace(a);
    t.bitmap.assign(t.objects.size(), true);
  });
  stats.tiles = index.leaf_count();

  QueryResult& q0_result = out.first_result;
  for (const auto& spec : q0.aggs) {
    const TileMetadata* meta = spec.func == AggregateFunc::Count ? nullptr : &q0_meta[slot_of(spec.attribute)];
    q0_result.aggregates.push_back(exact_result(spec, q0_count, meta));
    if (q0_result.aggregates.back().estimate) q0_result.aggregates.back().estimate->gamma = q0.gamma;
  }
  for (const LeafHit& h : index.locate_overlapping_leaves(q0.ix, q0.iy)) {
    if (h.containment == Containment::Full) {
      ++q0_result.stats.tiles_full;
    } else {
      ++q0_result.stats.tiles_partial;
    }
  }
  q0_result.stats.region_objects = q0_count;
  stats.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  q0_result.stats.elapsed_ms = stats.elapsed_ms;
  q0_result.init = stats;
  out.stats = stats;
  return out;
}

}  // namespace tilescope
