#include "macs/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace macs {
namespace {

std::optional<double> auc_value(const std::vector<ScoredLabel>& records) {
  std::size_t n_pos = 0;
  for (const ScoredLabel& r : records) n_pos += r.label ? 1 : 0;
  const std::size_t n_neg = records.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].score < records[b].score;
  });

  // Midranks give the 0.5-per-tie pair credit of the Mann-Whitney statistic.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && records[order[j]].score == records[order[i]].score) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (records[order[k]].label) rank_sum_pos += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

ConfusionCounts confusion_of(const std::vector<ScoredLabel>& records, double threshold) {
  ConfusionCounts c;
  for (const ScoredLabel& r : records) {
    const bool flag = r.score > threshold;
    if (flag && r.label) ++c.tp;
    if (flag && !r.label) ++c.fp;
    if (!flag && !r.label) ++c.tn;
    if (!flag && r.label) ++c.fn;
  }
  return c;
}

nlohmann::ordered_json metric_to_json(const MetricCi& m) {
  return nlohmann::ordered_json{{"value", m.value}, {"ci_lo", m.lo}, {"ci_hi", m.hi}};
}

}  // namespace

ThresholdResult choose_threshold(const std::vector<double>& positive_validation_scores,
                                 double target) {
  if (positive_validation_scores.empty()) {
    throw DataError("choose_threshold: no positive validation scores");
  }
  if (!(target > 0.0) || !(target <= 1.0)) {
    throw ConfigError("choose_threshold: target must be in (0, 1]");
  }

  std::vector<double> sorted = positive_validation_scores;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  std::vector<double> candidates = sorted;
  candidates.push_back(0.0);
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (double t : candidates) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    const double fraction = static_cast<double>(above) / n;
    if (fraction >= target) {
      return ThresholdResult{t, target, fraction};
    }
  }
  throw DataError("choose_threshold: no candidate threshold meets the target");
}

std::vector<bool> classify(const std::vector<double>& scores, double threshold) {
  std::vector<bool> flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > threshold;
  return flags;
}

ConfusionCounts confusion(const std::vector<bool>& flags, const std::vector<bool>& labels) {
  if (flags.size() != labels.size()) {
    throw DataError("confusion: flags/labels length mismatch");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] && labels[i]) ++c.tp;
    if (flags[i] && !labels[i]) ++c.fp;
    if (!flags[i] && !labels[i]) ++c.tn;
    if (!flags[i] && labels[i]) ++c.fn;
  }
  return c;
}

double sensitivity(const ConfusionCounts& counts) {
  const std::size_t denom = counts.tp + counts.fn;
  if (denom == 0) throw MetricError("sensitivity: no positive labels");
  return static_cast<double>(counts.tp) / static_cast<double>(denom);
}

double specificity(const ConfusionCounts& counts) {
  const std::size_t denom = counts.tn + counts.fp;
  if (denom == 0) throw MetricError("specificity: no negative labels");
  return static_cast<double>(counts.tn) / static_cast<double>(denom);
}

double efficiency_gain(std::size_t total_evaluated, std::size_t flagged_positive) {
  if (total_evaluated == 0) throw DataError("efficiency_gain: zero total");
  if (flagged_positive > total_evaluated) {
    throw DataError("efficiency_gain: flagged exceeds total");
  }
  return static_cast<double>(total_evaluated - flagged_positive) /
         static_cast<double>(total_evaluated);
}

std::pair<double, std::vector<std::pair<double, double>>> roc_auc(
    const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw DataError("roc_auc: length mismatch");
  std::vector<ScoredLabel> records(scores.size());
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    records[i] = {scores[i], static_cast<bool>(labels[i])};
    n_pos += labels[i] ? 1 : 0;
  }
  const std::size_t n_neg = records.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("roc_auc: single class");

  const double auc = *auc_value(records);

  std::sort(records.begin(), records.end(), [](const ScoredLabel& a, const ScoredLabel& b) {
    return a.score > b.score;
  });
  std::vector<std::pair<double, double>> points;
  points.emplace_back(0.0, 0.0);
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && records[j].score == records[i].score) {
      if (records[j].label) ++tp; else ++fp;
      ++j;
    }
    points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                        static_cast<double>(tp) / static_cast<double>(n_pos));
    i = j;
  }
  return {auc, points};
}

EvalReport build_eval_report(const std::vector<double>& scores,
                             const std::vector<bool>& labels, double threshold,
                             std::size_t n_boot, RngSpec rng) {
  if (scores.size() != labels.size()) throw DataError("eval: length mismatch");
  if (scores.empty()) throw DataError("eval: empty test set");

  std::vector<ScoredLabel> records(scores.size());
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    records[i] = {scores[i], static_cast<bool>(labels[i])};
    if (scores[i] > threshold) ++flagged;
  }

  EvalReport report;
  auto [auc, points] = roc_auc(scores, labels);
  report.roc_points = std::move(points);

  const ConfusionCounts cm = confusion_of(records, threshold);
  report.auc.value = auc;
  report.sensitivity.value = sensitivity(cm);
  report.specificity.value = specificity(cm);
  report.efficiency_gain.value = efficiency_gain(records.size(), flagged);

  using Eval = std::function<std::optional<double>(const std::vector<ScoredLabel>&)>;
  const Eval auc_eval = [](const std::vector<ScoredLabel>& r) { return auc_value(r); };
  const Eval sens_eval = [threshold](const std::vector<ScoredLabel>& r) -> std::optional<double> {
    const ConfusionCounts c = confusion_of(r, threshold);
    if (c.tp + c.fn == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  };
  const Eval spec_eval = [threshold](const std::vector<ScoredLabel>& r) -> std::optional<double> {
    const ConfusionCounts c = confusion_of(r, threshold);
    if (c.tn + c.fp == 0) return std::nullopt;
    return static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  };
  const Eval eff_eval = [threshold](const std::vector<ScoredLabel>& r) -> std::optional<double> {
    std::size_t f = 0;
    for (const ScoredLabel& s : r) f += s.score > threshold ? 1 : 0;
    return static_cast<double>(r.size() - f) / static_cast<double>(r.size());
  };

  std::tie(report.auc.lo, report.auc.hi) =
      metric_ci<ScoredLabel>(auc_eval, records, n_boot, derive(rng, 0), "auc");
  std::tie(report.sensitivity.lo, report.sensitivity.hi) =
      metric_ci<ScoredLabel>(sens_eval, records, n_boot, derive(rng, 1), "sensitivity");
  std::tie(report.specificity.lo, report.specificity.hi) =
      metric_ci<ScoredLabel>(spec_eval, records, n_boot, derive(rng, 2), "specificity");
  std::tie(report.efficiency_gain.lo, report.efficiency_gain.hi) =
      metric_ci<ScoredLabel>(eff_eval, records, n_boot, derive(rng, 3), "efficiency_gain");
  return report;
}

nlohmann::ordered_json eval_report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["auc"] = metric_to_json(report.auc);
  j["sensitivity"] = metric_to_json(report.sensitivity);
  j["specificity"] = metric_to_json(report.specificity);
  j["efficiency_gain"] = metric_to_json(report.efficiency_gain);
  return j;
}

std::string roc_points_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "fpr,tpr\n";
  out.precision(17);
  for (const auto& [fpr, tpr] : report.roc_points) {
    out << fpr << "," << tpr << "\n";
  }
  return out.str();
}

}  // namespace macs
