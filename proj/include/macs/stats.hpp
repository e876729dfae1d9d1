#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "macs/error.hpp"
#include "macs/rng.hpp"

namespace macs {

struct SurvivalObservation {
  double time_days = 0.0;
  bool event = false;
};

struct KMCurve {
  std::vector<double> event_times;
  std::vector<double> survival;
  std::vector<std::size_t> at_risk;
  std::vector<std::size_t> deaths;
};

KMCurve km_fit(const std::vector<SurvivalObservation>& observations);

// Smallest event time with S(t) <= 0.5; nullopt when the median is not reached.
std::optional<double> km_median(const KMCurve& curve);

struct MedianCi {
  std::optional<double> lo;
  std::optional<double> hi;  // nullopt = not reached
};

MedianCi km_median_ci(const std::vector<SurvivalObservation>& observations, std::size_t n_boot,
                      RngSpec rng);

struct LogrankResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

LogrankResult logrank(const std::vector<SurvivalObservation>& group_a,
                      const std::vector<SurvivalObservation>& group_b);

// Survival function of the chi-square distribution with one degree of freedom,
// evaluated as erfc(sqrt(x/2)) with a series + continued-fraction erfc.
double chi2_sf(double x, int df = 1);

// Linear interpolation between closest order statistics (the "type 7" rule).
double quantile(std::vector<double> values, double q);

struct DiffCi {
  double point_diff = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of stat(A) - stat(B) with independent per-cohort
// resampling; iteration i draws from derive(rng, i), cohort A first.
template <class T>
DiffCi bootstrap_diff_ci(const std::function<std::optional<double>(const std::vector<T>&)>& stat,
                         const std::vector<T>& sample_a, const std::vector<T>& sample_b,
                         std::size_t n_boot, RngSpec rng, std::string_view stat_name) {
  if (sample_a.empty() || sample_b.empty())
    throw DataError("bootstrap_diff_ci: empty sample");
  auto point_a = stat(sample_a);
  auto point_b = stat(sample_b);
  if (!point_a || !point_b)
    throw MetricError(std::string(stat_name) + " undefined on an original sample");
  std::vector<double> diffs;
  diffs.reserve(n_boot);
  std::size_t undefined = 0;
  std::vector<T> res_a(sample_a.size()), res_b(sample_b.size());
  for (std::size_t i = 0; i < n_boot; ++i) {
    Rng it(derive(rng, i));
    for (std::size_t k = 0; k < sample_a.size(); ++k) res_a[k] = sample_a[it.below(sample_a.size())];
    for (std::size_t k = 0; k < sample_b.size(); ++k) res_b[k] = sample_b[it.below(sample_b.size())];
    auto sa = stat(res_a);
    auto sb = stat(res_b);
    if (!sa || !sb) {
      ++undefined;
      continue;
    }
    diffs.push_back(*sa - *sb);
  }
  if (undefined * 20 > n_boot)
    throw MetricError(std::string(stat_name) + " undefined in more than 5% of resamples");
  DiffCi out;
  out.point_diff = *point_a - *point_b;
  out.lo = quantile(diffs, 0.025);
  out.hi = quantile(diffs, 0.975);
  return out;
}

struct Summary {
  double median = 0.0;
  double iqr_lo = 0.0;
  double iqr_hi = 0.0;
};

Summary describe(const std::vector<double>& values);

std::map<std::string, double> category_percentages(const std::vector<std::string>& items);

}  // namespace macs
