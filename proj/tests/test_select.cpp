#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "macs/error.hpp"
#include "macs/rng.hpp"
#include "macs/select.hpp"

using namespace macs;

namespace {

double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  double credit = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        credit += 1.0;
      else if (scores[i] == scores[j])
        credit += 0.5;
    }
  }
  return credit / static_cast<double>(pairs);
}

double fraction_above(const std::vector<double>& scores, double t) {
  std::size_t above = 0;
  for (double s : scores) above += (s > t);
  return static_cast<double>(above) / static_cast<double>(scores.size());
}

}  // namespace

TEST_CASE("choose_threshold spec cases") {
  std::vector<double> decile = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  auto r = choose_threshold(decile, 0.8);
  CHECK(r.threshold == 0.2);
  CHECK(r.target_sensitivity == 0.8);
  CHECK(r.achieved_validation_sensitivity == doctest::Approx(0.8).epsilon(1e-15));

  auto strict = choose_threshold({0.3, 0.5}, 1.0);
  CHECK(strict.threshold == 0.0);
  CHECK(strict.achieved_validation_sensitivity == 1.0);

  auto ties = choose_threshold({1.0, 1.0, 1.0, 1.0}, 0.95);
  CHECK(ties.threshold == 0.0);
  CHECK(ties.achieved_validation_sensitivity == 1.0);

  CHECK_THROWS_AS(choose_threshold({}, 0.95), DataError);
  CHECK_THROWS_AS(choose_threshold({0.5}, 0.0), ConfigError);
  CHECK_THROWS_AS(choose_threshold({0.5}, 1.2), ConfigError);
  CHECK_THROWS_AS(choose_threshold({0.0, 0.0, 0.5}, 0.9), DataError);
}

TEST_CASE("choose_threshold satisfies the rule on random score sets") {
  Rng rng(606, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng.below(40);
    std::vector<double> scores;
    for (std::size_t k = 0; k < n; ++k)
      scores.push_back((1.0 + static_cast<double>(rng.below(20))) / 21.0);
    double target = (1.0 + static_cast<double>(rng.below(20))) / 20.0;
    auto r = choose_threshold(scores, target);

    CHECK(fraction_above(scores, r.threshold) >= target);
    CHECK(r.achieved_validation_sensitivity == fraction_above(scores, r.threshold));
    CHECK(r.achieved_validation_sensitivity >= r.target_sensitivity);

    std::set<double> candidates(scores.begin(), scores.end());
    candidates.insert(0.0);
    for (double c : candidates) {
      if (c > r.threshold) CHECK(fraction_above(scores, c) < target);
    }
    CHECK(candidates.count(r.threshold) == 1);
  }
}

TEST_CASE("classify is strict") {
  CHECK(classify({0.5}, 0.5) == std::vector<bool>{false});
  CHECK(classify({0.2, 0.8}, 0.0) == std::vector<bool>{true, true});
  Rng rng(17, 4);
  std::vector<double> scores;
  for (int k = 0; k < 20; ++k) scores.push_back(rng.next_double());
  auto flags = classify(scores, 0.5);
  for (int k = 0; k < 20; ++k) CHECK(flags[k] == (scores[k] > 0.5));
}

TEST_CASE("confusion counts") {
  auto all_right = confusion({true, false, true}, {true, false, true});
  CHECK(all_right.fp == 0);
  CHECK(all_right.fn == 0);
  CHECK(all_right.tp == 2);
  CHECK(all_right.tn == 1);

  auto inverted = confusion({false, true}, {true, false});
  CHECK(inverted.tp == 0);
  CHECK(inverted.tn == 0);
  CHECK(inverted.fn == 1);
  CHECK(inverted.fp == 1);

  std::vector<bool> flags = {1, 1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 0};
  std::vector<bool> labels = {1, 0, 1, 0, 1, 1, 0, 1, 0, 0, 0, 1};
  auto c = confusion(flags, labels);
  CHECK(c.tp == 3);
  CHECK(c.fp == 3);
  CHECK(c.tn == 3);
  CHECK(c.fn == 3);
  CHECK(c.tp + c.fp + c.tn + c.fn == flags.size());

  CHECK_THROWS_AS(confusion({true}, {true, false}), DataError);
}

TEST_CASE("sensitivity and specificity") {
  CHECK(std::abs(sensitivity({1425, 0, 0, 60}) - 0.9596) < 1e-4);
  CHECK(sensitivity({5, 0, 0, 0}) == 1.0);
  CHECK(sensitivity({3, 0, 0, 1}) == 0.75);
  CHECK_THROWS_AS(sensitivity({0, 3, 4, 0}), MetricError);

  CHECK(specificity({0, 1, 3, 0}) == 0.75);
  CHECK(specificity({0, 0, 5, 0}) == 1.0);
  CHECK_THROWS_AS(specificity({2, 0, 0, 1}), MetricError);
}

TEST_CASE("efficiency gain") {
  CHECK(std::abs(efficiency_gain(17292, 3827) - 0.7787) < 1e-4);
  CHECK(efficiency_gain(100, 100) == 0.0);
  CHECK(efficiency_gain(100, 0) == 1.0);
  CHECK_THROWS_AS(efficiency_gain(0, 0), DataError);
  CHECK_THROWS_AS(efficiency_gain(5, 6), DataError);
}

TEST_CASE("roc_auc spec cases") {
  auto [auc_sep, pts_sep] = roc_auc({0.9, 0.8, 0.1, 0.2}, {true, true, false, false});
  CHECK(auc_sep == 1.0);

  auto [auc_tie, pts_tie] = roc_auc({0.5, 0.5, 0.5, 0.5}, {true, false, true, false});
  CHECK(auc_tie == 0.5);

  // Pairwise: 0.9 beats both negatives, 0.4 beats 0.35 and loses to 0.8,
  // so 3 wins and 1 loss of 4 pairs.
  auto [auc, pts] = roc_auc({0.9, 0.4, 0.35, 0.8}, {true, true, false, false});
  CHECK(auc == 0.75);

  CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {true, true}), DataError);
  CHECK_THROWS_AS(roc_auc({0.1}, {true, false}), DataError);
}

TEST_CASE("roc points form a staircase from origin to corner") {
  auto [auc, pts] = roc_auc({0.9, 0.4, 0.35, 0.8, 0.4}, {true, false, true, false, true});
  REQUIRE(pts.size() >= 2);
  CHECK(pts.front() == std::pair<double, double>{0.0, 0.0});
  CHECK(pts.back() == std::pair<double, double>{1.0, 1.0});
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].first >= pts[i - 1].first);
    CHECK(pts[i].second >= pts[i - 1].second);
  }
}

TEST_CASE("auc equals the pairwise oracle and the trapezoid area") {
  Rng rng(9090, 2);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 4 + rng.below(30);
    std::vector<double> scores;
    std::vector<bool> labels;
    bool has_pos = false, has_neg = false;
    for (std::size_t k = 0; k < n; ++k) {
      scores.push_back(static_cast<double>(rng.below(8)) / 8.0);
      bool lab = rng.bernoulli(0.4);
      labels.push_back(lab);
      (lab ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = true;
    if (!has_neg) labels[1] = false;

    auto [auc, pts] = roc_auc(scores, labels);
    CHECK(auc == doctest::Approx(pairwise_auc(scores, labels)).epsilon(1e-12));

    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
    CHECK(auc == doctest::Approx(area).epsilon(1e-12));

    std::vector<double> warped;
    for (double s : scores) warped.push_back(s * s * s + 0.1 * s);
    auto [auc2, pts2] = roc_auc(warped, labels);
    CHECK(auc2 == doctest::Approx(auc).epsilon(1e-12));
  }
}

TEST_CASE("metric_ci constant and deterministic") {
  std::vector<int> records = {1, 2, 3, 4, 5};
  std::function<std::optional<double>(const std::vector<int>&)> constant =
      [](const std::vector<int>&) -> std::optional<double> { return 7.5; };
  auto [lo, hi] = metric_ci<int>(constant, records, 100, RngSpec{3, 14}, "constant");
  CHECK(lo == 7.5);
  CHECK(hi == 7.5);

  std::function<std::optional<double>(const std::vector<int>&)> mean =
      [](const std::vector<int>& v) -> std::optional<double> {
    double s = 0;
    for (int x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto a = metric_ci<int>(mean, records, 200, RngSpec{5, 6}, "mean");
  auto b = metric_ci<int>(mean, records, 200, RngSpec{5, 6}, "mean");
  CHECK(a == b);

  CHECK_THROWS_AS(metric_ci<int>(mean, {}, 100, RngSpec{0, 0}, "mean"), DataError);
}

TEST_CASE("metric_ci flags a mostly undefined metric by name") {
  std::vector<int> records = {1, 2, 3};
  std::function<std::optional<double>(const std::vector<int>&)> flaky =
      [](const std::vector<int>& v) -> std::optional<double> {
    if (v[0] % 2) return std::nullopt;
    return 1.0;
  };
  try {
    metric_ci<int>(flaky, records, 400, RngSpec{8, 1}, "sensitivity");
    FAIL("expected MetricError");
  } catch (const MetricError& e) {
    CHECK(std::string(e.what()).find("sensitivity") != std::string::npos);
  }
}

TEST_CASE("metric_ci matches a brute-force resampler on a seeded instance") {
  Rng gen(140, 9);
  std::vector<ScoredLabel> records;
  for (int k = 0; k < 200; ++k) {
    bool label = gen.bernoulli(0.3);
    double score = label ? 0.3 + 0.7 * gen.next_double() : 0.6 * gen.next_double();
    records.push_back({score, label});
  }
  const double threshold = 0.45;
  std::function<std::optional<double>(const std::vector<ScoredLabel>&)> sens =
      [&](const std::vector<ScoredLabel>& v) -> std::optional<double> {
    std::size_t tp = 0, fn = 0;
    for (const auto& r : v) {
      if (!r.label) continue;
      (r.score > threshold ? tp : fn)++;
    }
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
  };
  RngSpec spec{77, stream_id("bootstrap")};
  const std::size_t n_boot = 300;
  auto [lo, hi] = metric_ci<ScoredLabel>(sens, records, n_boot, spec, "sensitivity");

  std::vector<double> vals;
  for (std::size_t i = 0; i < n_boot; ++i) {
    Rng it(derive(spec, i));
    std::size_t tp = 0, fn = 0;
    for (std::size_t k = 0; k < records.size(); ++k) {
      const auto& r = records[it.below(records.size())];
      if (!r.label) continue;
      (r.score > threshold ? tp : fn)++;
    }
    if (tp + fn) vals.push_back(static_cast<double>(tp) / static_cast<double>(tp + fn));
  }
  CHECK(lo == quantile(vals, 0.025));
  CHECK(hi == quantile(vals, 0.975));
}

TEST_CASE("build_eval_report assembles point metrics with cis") {
  Rng gen(808, 3);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (int k = 0; k < 150; ++k) {
    bool label = gen.bernoulli(0.25);
    labels.push_back(label);
    scores.push_back(label ? 0.4 + 0.6 * gen.next_double() : 0.5 * gen.next_double());
  }
  double threshold = 0.35;
  RngSpec spec{42, stream_id("bootstrap")};
  auto report = build_eval_report(scores, labels, threshold, 150, spec);

  auto [auc, pts] = roc_auc(scores, labels);
  CHECK(report.auc.value == auc);
  CHECK(report.roc_points == pts);
  auto counts = confusion(classify(scores, threshold), labels);
  CHECK(report.sensitivity.value == sensitivity(counts));
  CHECK(report.specificity.value == specificity(counts));
  CHECK(report.efficiency_gain.value ==
        efficiency_gain(scores.size(), counts.tp + counts.fp));
  CHECK(report.auc.lo <= report.auc.value);
  CHECK(report.auc.hi >= report.auc.value);

  auto report2 = build_eval_report(scores, labels, threshold, 150, spec);
  CHECK(report2.auc.lo == report.auc.lo);
  CHECK(report2.efficiency_gain.hi == report.efficiency_gain.hi);

  auto j = eval_report_to_json(report);
  CHECK(j["auc"]["value"] == report.auc.value);
  CHECK(j["sensitivity"]["ci_lo"] == report.sensitivity.lo);
  CHECK(j["efficiency_gain"]["ci_hi"] == report.efficiency_gain.hi);

  auto csv = roc_points_csv(report);
  CHECK(csv.rfind("fpr,tpr\n", 0) == 0);
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == report.roc_points.size() + 1);
}
