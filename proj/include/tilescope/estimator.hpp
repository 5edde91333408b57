#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace tilescope {

// One tile's contribution to a query, treated as an independent stratum.
struct StratumStat {
  std::uint64_t population = 0;   // objects of the tile inside the query region
  std::uint64_t sample_size = 0;  // objects actually read
  double mean_hat = 0.0;
  double var_hat = std::numeric_limits<double>::quiet_NaN();  // undefined below two samples
  bool exact = false;                                          // contributes with zero variance

  bool exhausted() const { return exact || sample_size >= population; }
};

struct Estimate {
  double value = 0.0;
  double variance = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double eps_est = 0.0;  // CI half-width relative to |value|
  double gamma = 0.95;
};

struct ConfidenceBounds {
  double lo = 0.0;
  double hi = 0.0;
  double eps_est = 0.0;
};

// Standard normal inverse CDF for p in (0, 1).
double normal_quantile(double p);

// Two-sided quantile z with P(|Z| <= z) = gamma.
double z_for_confidence(double gamma);

ConfidenceBounds confidence_interval(double value, double variance, double gamma);

// Stratified estimators with finite-population correction. Exact or
// exhausted strata add no variance; a non-exhausted stratum with fewer than
// two samples raises InsufficientSample.
Estimate combine_sum(std::span<const StratumStat> strata, double gamma);
Estimate combine_mean(std::span<const StratumStat> strata, double gamma);

Estimate count_exact(std::span<const std::uint64_t> region_counts);

// Exact min or max over candidate values (raw values and stored per-tile
// extremes alike). Throws EmptyRegion when there are none.
Estimate minmax_exact(std::span<const double> values, bool want_max);

}  // namespace tilescope
