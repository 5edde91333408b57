#include "tilescope/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "tilescope/error.hpp"

namespace tilescope {

TileCase classify(const Tile& tile, Containment containment, std::size_t attribute) {
  const MetadataStatus status = metadata_status(tile, attribute);
  if (status == MetadataStatus::NotAvailable) return TileCase::Case4;
  if (containment != Containment::Full) return TileCase::Case3;
  return status == MetadataStatus::Exact ? TileCase::Case1 : TileCase::Case2;
}

std::vector<std::uint32_t> draw_samples(SamplingState& state, double rate, std::size_t min_batch,
                                        std::mt19937_64& rng) {
  if (state.remaining() == 0) return {};
  const auto by_rate =
      static_cast<std::size_t>(std::ceil(rate * static_cast<double>(state.eligible0) - 1e-9));
  const std::size_t target = std::max(min_batch, by_rate);
  std::size_t want = target > state.drawn ? target - state.drawn : 1;
  want = std::min(want, state.remaining());

  const std::size_t begin = state.drawn;
  for (std::size_t i = begin; i < begin + want; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, state.pool.size() - 1);
    std::swap(state.pool[i], state.pool[pick(rng)]);
  }
  std::vector<std::uint32_t> out(state.pool.begin() + static_cast<std::ptrdiff_t>(begin),
                                 state.pool.begin() + static_cast<std::ptrdiff_t>(begin + want));
  std::sort(out.begin(), out.end());
  state.drawn += want;
  state.rate = rate;
  return out;
}

double adjust_rate(double eps_current, double eps_max, double rate, const EngineConfig& cfg) {
  double factor = cfg.rate_cap;
  if (eps_max > 0.0 && std::isfinite(eps_current)) {
    const double ratio = eps_current / eps_max;
    factor = std::clamp(ratio * ratio, cfg.rate_floor, cfg.rate_cap);
  }
  return std::min(1.0, rate * factor);
}

void persist_metadata(Tile& tile, std::span<const std::size_t> attributes, std::uint32_t position,
                      std::span<const double> values, PersistScope scope,
                      std::map<std::size_t, TileMetadata>& scratch) {
  if (scope == PersistScope::FullTile) {
    tile.absorb_sample(position, attributes, values);
    return;
  }
  for (std::size_t k = 0; k < attributes.size(); ++k) scratch[attributes[k]].absorb(values[k]);
}

QueryEngine::QueryEngine(TileIndex& index, RawReader& reader, const EngineConfig& cfg, std::mt19937_64& rng)
    : index_(index), reader_(reader), cfg_(cfg), rng_(rng) {
  cfg_.validate();
}

namespace {

struct Stratum {
  Tile* tile = nullptr;
  PersistScope scope = PersistScope::PartialRegion;
  std::uint64_t population = 0;
  std::vector<std::size_t> attrs;
  std::map<std::size_t, TileMetadata> scratch;
  SamplingState sampling;

  const TileMetadata& meta(std::size_t attr) const {
    return scope == PersistScope::FullTile ? tile->metadata.at(attr) : scratch.at(attr);
  }
  std::uint64_t sampled() const {
    return scope == PersistScope::FullTile ? tile->bitmap.popcount() : sampling.drawn;
  }
  bool exhausted() const { return sampled() >= population; }
};

struct Pick {
  std::uint64_t offset;
  std::uint32_t stratum;
  std::uint32_t position;
};

bool is_moment(AggregateFunc f) { return f == AggregateFunc::Sum || f == AggregateFunc::Mean; }

}  // namespace

QueryResult QueryEngine::execute(const ExploratoryQuery& query) {
  const auto t0 = std::chrono::steady_clock::now();
  query.validate(reader_.dataset());
  QueryResult result;
  QueryStats& stats = result.stats;
  IoCounter counter;

  // Adaptation runs before classification so split children show up as new
  // leaves of this query.
  std::vector<LeafHit> hits = index_.locate_overlapping_leaves(query.ix, query.iy);
  if (cfg_.adapt) {
    const SplitPolicy policy{cfg_.split_threshold, cfg_.max_depth};
    for (const LeafHit& h : hits) stats.tiles_split += maybe_split(*h.tile, query.ix, query.iy, policy).splits;
    if (stats.tiles_split > 0) {
      index_.record_splits(stats.tiles_split);
      hits = index_.locate_overlapping_leaves(query.ix, query.iy);
    }
  }

  std::vector<std::size_t> value_attrs;
  bool has_minmax = false;
  bool has_moment = false;
  for (const AggregateSpec& a : query.aggs) {
    if (a.func == AggregateFunc::Count) continue;
    value_attrs.push_back(a.attribute);
    has_minmax |= !is_moment(a.func);
    has_moment |= is_moment(a.func);
  }
  std::sort(value_attrs.begin(), value_attrs.end());
  value_attrs.erase(std::unique(value_attrs.begin(), value_attrs.end()), value_attrs.end());

  std::vector<Stratum> strata;
  strata.reserve(hits.size());
  for (const LeafHit& h : hits) {
    Tile& tile = *h.tile;
    const bool full = h.containment == Containment::Full;
    ++(full ? stats.tiles_full : stats.tiles_partial);
    std::vector<std::uint32_t> region = objects_in_region(tile, query.ix, query.iy);
    if (region.empty()) continue;

    Stratum s;
    s.tile = &tile;
    s.population = region.size();
    stats.region_objects += region.size();
    if (value_attrs.empty()) {
      ++stats.case_counts[full ? 0 : 2];
      strata.push_back(std::move(s));
      continue;
    }
    if (full && cfg_.reuse_metadata) {
      s.scope = PersistScope::FullTile;
      bool missing = std::any_of(value_attrs.begin(), value_attrs.end(),
                                 [&](std::size_t a) { return !tile.tracks(a); });
      if (missing) {
        std::vector<std::size_t> tracked = value_attrs;
        for (const auto& [a, m] : tile.metadata) tracked.push_back(a);
        std::sort(tracked.begin(), tracked.end());
        tracked.erase(std::unique(tracked.begin(), tracked.end()), tracked.end());
        tile.reset_tracking(tracked);
      }
      for (const auto& [a, m] : tile.metadata) s.attrs.push_back(a);
      std::vector<std::uint32_t> unsampled;
      for (std::uint32_t i = 0; i < tile.objects.size(); ++i) {
        if (!tile.bitmap.test(i)) unsampled.push_back(i);
      }
      s.sampling = SamplingState(std::move(unsampled));
      ++stats.case_counts[static_cast<int>(classify(tile, h.containment, value_attrs.front())) - 1];
    } else {
      s.scope = PersistScope::PartialRegion;
      s.attrs = value_attrs;
      for (std::size_t a : value_attrs) s.scratch[a];
      s.sampling = SamplingState(std::move(region));
      const TileCase c = full ? TileCase::Case4 : classify(tile, h.containment, value_attrs.front());
      ++stats.case_counts[static_cast<int>(c) - 1];
    }
    strata.push_back(std::move(s));
  }

  const double eps_target = cfg_.exact_only ? 0.0 : query.eps_max;
  const bool read_everything = eps_target == 0.0 || has_minmax;
  const std::size_t tiny = std::min<std::size_t>(4, cfg_.min_batch);
  double rate = read_everything ? 1.0 : cfg_.initial_rate;

  auto draw = [&](Stratum& s, std::vector<Pick>& plan, std::uint32_t id) {
    std::vector<std::uint32_t> picked;
    if (read_everything || s.population <= tiny) {
      picked = draw_samples(s.sampling, 1.0, s.sampling.remaining(), rng_);
    } else {
      picked = draw_samples(s.sampling, rate, cfg_.min_batch, rng_);
    }
    for (std::uint32_t p : picked) plan.push_back({s.tile->objects[p].offset, id, p});
  };

  auto run_round = [&](std::vector<Pick>& plan) {
    if (plan.empty()) return;
    std::sort(plan.begin(), plan.end(), [](const Pick& a, const Pick& b) { return a.offset < b.offset; });
    std::vector<std::uint64_t> offsets;
    offsets.reserve(plan.size());
    std::vector<std::size_t> wanted;
    for (const Pick& p : plan) offsets.push_back(p.offset);
    std::vector<char> involved(strata.size(), 0);
    for (const Pick& p : plan) involved[p.stratum] = 1;
    for (std::size_t i = 0; i < strata.size(); ++i) {
      if (involved[i]) wanted.insert(wanted.end(), strata[i].attrs.begin(), strata[i].attrs.end());
    }
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
    ValueTable table = reader_.read_objects(offsets, wanted, counter);

    std::vector<double> values;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      Stratum& s = strata[plan[i].stratum];
      auto row = table.row(i);
      values.clear();
      for (std::size_t a : s.attrs) {
        values.push_back(row[static_cast<std::size_t>(std::lower_bound(wanted.begin(), wanted.end(), a) - wanted.begin())]);
      }
      persist_metadata(*s.tile, s.attrs, plan[i].position, values, s.scope, s.scratch);
    }
    ++stats.sampling_iterations;
  };

  auto all_exhausted = [&] {
    return std::all_of(strata.begin(), strata.end(), [](const Stratum& s) { return s.exhausted(); });
  };

  // Returns the largest relative error among the sum/mean aggregates.
  auto estimate_all = [&]() -> double {
    result.aggregates.clear();
    double worst = 0.0;
    const bool exhausted = all_exhausted();
    for (const AggregateSpec& spec : query.aggs) {
      AggregateResult r;
      r.spec = spec;
      try {
        if (spec.func == AggregateFunc::Count) {
          std::vector<std::uint64_t> counts;
          for (const Stratum& s : strata) counts.push_back(s.population);
          r.estimate = count_exact(counts);
          r.exact = true;
        } else if (is_moment(spec.func)) {
          std::vector<StratumStat> stat;
          stat.reserve(strata.size());
          for (const Stratum& s : strata) {
            const TileMetadata& m = s.meta(spec.attribute);
            StratumStat st;
            st.population = s.population;
            st.sample_size = m.n;
            st.exact = m.n >= s.population;
            st.mean_hat = m.n == 0 ? 0.0 : (st.exact ? m.sum / static_cast<double>(m.n) : m.mean);
            st.var_hat = m.sample_variance().value_or(std::numeric_limits<double>::quiet_NaN());
            stat.push_back(st);
          }
          r.estimate = spec.func == AggregateFunc::Sum ? combine_sum(stat, query.gamma) : combine_mean(stat, query.gamma);
          r.exact = exhausted;
          worst = std::max(worst, r.estimate->eps_est);
        } else {
          std::vector<double> candidates;
          for (const Stratum& s : strata) {
            const TileMetadata& m = s.meta(spec.attribute);
            if (m.n > 0) candidates.push_back(spec.func == AggregateFunc::Min ? m.min_seen : m.max_seen);
          }
          r.estimate = minmax_exact(candidates, spec.func == AggregateFunc::Max);
          r.exact = true;
        }
        r.estimate->gamma = query.gamma;
      } catch (const EmptyRegion& e) {
        r.estimate.reset();
        r.error = e.what();
        r.exact = true;
      }
      result.aggregates.push_back(std::move(r));
    }
    return worst;
  };

  if (!value_attrs.empty()) {
    std::vector<Pick> plan;
    for (std::uint32_t i = 0; i < strata.size(); ++i) {
      Stratum& s = strata[i];
      if (s.exhausted()) continue;
      if (read_everything || s.sampled() < 2) draw(s, plan, i);
    }
    run_round(plan);
  }

  double eps = estimate_all();
  while (has_moment && eps > eps_target && !all_exhausted()) {
    rate = adjust_rate(eps, eps_target, rate, cfg_);
    std::vector<Pick> plan;
    for (std::uint32_t i = 0; i < strata.size(); ++i) {
      if (!strata[i].exhausted()) draw(strata[i], plan, i);
    }
    run_round(plan);
    eps = estimate_all();
  }

  stats.io_reads = counter.reads();
  stats.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace tilescope
