#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "macs/error.hpp"
#include "macs/rng.hpp"
#include "macs/stats.hpp"

namespace macs {

struct ThresholdResult {
  double threshold = 0.0;
  double target_sensitivity = 0.95;
  double achieved_validation_sensitivity = 0.0;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

struct MetricCi {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct EvalReport {
  MetricCi auc;
  MetricCi sensitivity;
  MetricCi specificity;
  MetricCi efficiency_gain;
  std::vector<std::pair<double, double>> roc_points;  // (fpr, tpr)
};

struct ScoredLabel {
  double score = 0.0;
  bool label = false;
};

// Largest candidate threshold (0 or an observed score) keeping at least the
// target fraction of positive validation scores strictly above it.
ThresholdResult choose_threshold(const std::vector<double>& positive_validation_scores,
                                 double target);

std::vector<bool> classify(const std::vector<double>& scores, double threshold);

ConfusionCounts confusion(const std::vector<bool>& flags, const std::vector<bool>& labels);

double sensitivity(const ConfusionCounts& counts);
double specificity(const ConfusionCounts& counts);

double efficiency_gain(std::size_t total_evaluated, std::size_t flagged_positive);

// Mann-Whitney AUC with 0.5 credit for ties, plus the tie-aware ROC staircase
// with one point per distinct score cut, from (0,0) to (1,1).
std::pair<double, std::vector<std::pair<double, double>>> roc_auc(
    const std::vector<double>& scores, const std::vector<bool>& labels);

// Percentile (2.5%, 97.5%) bootstrap CI for a metric over seeded resamples of
// the records. Iteration i uses Rng(derive(rng, i)) and draws |records| index
// picks in order. Metrics may be undefined on a resample (returned nullopt);
// more than 5% undefined aborts with a MetricError naming the metric.
template <class T>
std::pair<double, double> metric_ci(
    const std::function<std::optional<double>(const std::vector<T>&)>& metric,
    const std::vector<T>& records, std::size_t n_boot, RngSpec rng,
    std::string_view metric_name) {
  if (records.empty()) throw DataError("metric_ci: empty records");
  const std::size_t n = records.size();
  std::vector<double> values;
  values.reserve(n_boot);
  std::size_t undefined = 0;
  std::vector<T> resample(n);
  for (std::size_t i = 0; i < n_boot; ++i) {
    Rng it(derive(rng, i));
    for (std::size_t k = 0; k < n; ++k) resample[k] = records[it.below(n)];
    std::optional<double> v = metric(resample);
    if (v) {
      values.push_back(*v);
    } else {
      ++undefined;
    }
  }
  if (undefined * 20 > n_boot) {
    throw MetricError(std::string("metric_ci: ") + std::string(metric_name) +
                      " undefined in more than 5% of resamples");
  }
  return {quantile(values, 0.025), quantile(values, 0.975)};
}

// Point metrics on the full test set plus bootstrap CIs. CI streams are
// derive(rng, k) with k = 0 auc, 1 sensitivity, 2 specificity,
// 3 efficiency_gain.
EvalReport build_eval_report(const std::vector<double>& scores,
                             const std::vector<bool>& labels, double threshold,
                             std::size_t n_boot, RngSpec rng);

nlohmann::ordered_json eval_report_to_json(const EvalReport& report);
std::string roc_points_csv(const EvalReport& report);

}  // namespace macs
