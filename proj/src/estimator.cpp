#include "tilescope/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tilescope/error.hpp"

namespace tilescope {

namespace {

constexpr double kZeroGuard = 1e-12;

Estimate exact_estimate(double value) {
  Estimate e;
  e.value = value;
  e.ci_lo = e.ci_hi = value;
  return e;
}

void check_strata(std::span<const StratumStat> strata) {
  for (std::size_t i = 0; i < strata.size(); ++i) {
    const StratumStat& s = strata[i];
    if (s.population == 0 || s.exhausted()) continue;
    if (s.sample_size < 2 || !std::isfinite(s.var_hat)) {
      throw InsufficientSample("stratum " + std::to_string(i) + " has " + std::to_string(s.sample_size) +
                                   " samples of " + std::to_string(s.population),
                               i);
    }
  }
}

// sigma^2 / n * (1 - n/N) for a sampled stratum; zero once exhausted.
double fpc_term(const StratumStat& s) {
  if (s.exhausted()) return 0.0;
  const double n = static_cast<double>(s.sample_size);
  const double big_n = static_cast<double>(s.population);
  return s.var_hat / n * (1.0 - n / big_n);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile needs p in (0,1)");
  // Rational approximation (Acklam), then one Halley step against erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

double z_for_confidence(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("confidence level must lie in (0,1)");
  return normal_quantile((1.0 + gamma) / 2.0);
}

ConfidenceBounds confidence_interval(double value, double variance, double gamma) {
  const double z = z_for_confidence(gamma);
  if (!(variance >= 0.0)) throw InvalidArgument("variance must be non-negative");
  if (variance == 0.0) return {value, value, 0.0};
  const double half = z * std::sqrt(variance);
  const double eps = std::abs(value) < kZeroGuard ? std::numeric_limits<double>::infinity() : half / std::abs(value);
  return {value - half, value + half, eps};
}

Estimate combine_sum(std::span<const StratumStat> strata, double gamma) {
  check_strata(strata);
  double value = 0.0;
  double variance = 0.0;
  for (const StratumStat& s : strata) {
    if (s.population == 0) continue;
    const double big_n = static_cast<double>(s.population);
    value += big_n * s.mean_hat;
    variance += big_n * big_n * fpc_term(s);
  }
  auto ci = confidence_interval(value, variance, gamma);
  return {value, variance, ci.lo, ci.hi, ci.eps_est, gamma};
}

Estimate combine_mean(std::span<const StratumStat> strata, double gamma) {
  check_strata(strata);
  double total = 0.0;
  for (const StratumStat& s : strata) total += static_cast<double>(s.population);
  if (total == 0.0) throw EmptyRegion("mean over an empty region");
  double value = 0.0;
  double variance = 0.0;
  for (const StratumStat& s : strata) {
    if (s.population == 0) continue;
    const double w = static_cast<double>(s.population) / total;
    value += w * s.mean_hat;
    variance += w * w * fpc_term(s);
  }
  auto ci = confidence_interval(value, variance, gamma);
  return {value, variance, ci.lo, ci.hi, ci.eps_est, gamma};
}

Estimate count_exact(std::span<const std::uint64_t> region_counts) {
  std::uint64_t total = 0;
  for (auto c : region_counts) total += c;
  return exact_estimate(static_cast<double>(total));
}

Estimate minmax_exact(std::span<const double> values, bool want_max) {
  if (values.empty()) throw EmptyRegion(want_max ? "max over an empty region" : "min over an empty region");
  return exact_estimate(want_max ? *std::max_element(values.begin(), values.end())
                                 : *std::min_element(values.begin(), values.end()));
}

}  // namespace tilescope
