#include <doctest.h>

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "macs/cohort.hpp"
#include "macs/datagen.hpp"
#include "macs/error.hpp"
#include "macs/rng.hpp"

using namespace macs;

namespace {

Date d(int y, int m, int day) { return make_date(y, m, day); }

// Independent restatement of the per-marker resolution rule: among successful
// tests, the closest within 60 days (distance ties prefer the pre-dx test),
// else the latest one strictly before the diagnosis. Dates per marker are kept
// distinct by the callers so no further tie-breaking is exercised.
std::optional<TestResult> oracle_resolve(const std::vector<BiomarkerTest>& tests, Marker marker,
                                         Date dx) {
  std::optional<TestResult> best;
  long best_key = 1 << 30;
  for (const auto& t : tests) {
    if (t.marker != marker) continue;
    if (t.result != TestResult::Positive && t.result != TestResult::Negative &&
        t.result != TestResult::Equivocal)
      continue;
    long dist = std::abs(days_between(dx, t.date));
    if (dist > 60) continue;
    long key = dist * 2 + (dx < t.date ? 1 : 0);
    if (key < best_key) {
      best_key = key;
      best = t.result;
    }
  }
  if (best) return best;
  std::optional<Date> latest;
  for (const auto& t : tests) {
    if (t.marker != marker) continue;
    if (t.result != TestResult::Positive && t.result != TestResult::Negative &&
        t.result != TestResult::Equivocal)
      continue;
    if (!(t.date < dx)) continue;
    if (!latest || *latest < t.date) {
      latest = t.date;
      best = t.result;
    }
  }
  return best;
}

BiomarkerStatus oracle_status(const std::vector<BiomarkerTest>& tests, Date dx) {
  auto er = oracle_resolve(tests, Marker::ER, dx);
  auto pr = oracle_resolve(tests, Marker::PR, dx);
  auto h2 = oracle_resolve(tests, Marker::HER2, dx);
  BiomarkerStatus s;
  if ((er && *er == TestResult::Positive) || (pr && *pr == TestResult::Positive))
    s.hr = HrStatus::Positive;
  else if (er && *er == TestResult::Negative && pr && *pr == TestResult::Negative)
    s.hr = HrStatus::Negative;
  else
    s.hr = HrStatus::Unknown;
  if (!h2)
    s.her2 = Her2Status::Unknown;
  else if (*h2 == TestResult::Positive)
    s.her2 = Her2Status::Positive;
  else if (*h2 == TestResult::Negative)
    s.her2 = Her2Status::Negative;
  else
    s.her2 = Her2Status::Equivocal;
  return s;
}

}  // namespace

TEST_CASE("breast cancer code prefixes") {
  Date day = d(2012, 1, 1);
  CHECK(has_breast_cancer_code({{"C50.911", day}}));
  CHECK_FALSE(has_breast_cancer_code({{"C34.1", day}}));
  CHECK(has_breast_cancer_code({{"174.9", day}, {"V70.0", day}}));
  CHECK(has_breast_cancer_code({{"175.0", day}}));
  CHECK(has_breast_cancer_code({{"c50911", day}}));
  CHECK_FALSE(has_breast_cancer_code({{"V174", day}}));
  CHECK_FALSE(has_breast_cancer_code({}));
}

TEST_CASE("activity criterion needs two distinct dates strictly after") {
  Date act = d(2011, 1, 1);
  CHECK_FALSE(meets_activity_criterion({d(2012, 3, 1), d(2012, 3, 1)}, act));
  CHECK(meets_activity_criterion({d(2012, 3, 1), d(2013, 5, 2)}, act));
  CHECK_FALSE(meets_activity_criterion({d(2010, 6, 1), d(2012, 3, 1)}, act));
  CHECK_FALSE(meets_activity_criterion({d(2011, 1, 1), d(2011, 1, 2)}, act));
  CHECK(meets_activity_criterion({d(2011, 1, 2), d(2011, 1, 3)}, act));
  CHECK_FALSE(meets_activity_criterion({}, act));
}

TEST_CASE("immortal time filter boundary") {
  Date act = d(2011, 1, 1);
  PatientRecord p;
  p.mbc_dx_date = d(2010, 12, 31);
  CHECK_FALSE(passes_immortal_time_filter(p, act));
  p.mbc_dx_date = std::nullopt;
  CHECK(passes_immortal_time_filter(p, act));
  p.mbc_dx_date = d(2011, 1, 1);
  CHECK(passes_immortal_time_filter(p, act));
}

TEST_CASE("select_candidates matches the predicate conjunction") {
  GeneratorConfig cfg;
  cfg.n_patients = 100;
  cfg.seed = 3;
  auto corpus = generate_corpus(cfg);
  // The generator satisfies the code and activity predicates by construction,
  // so break them by hand to exercise every branch.
  corpus[4].icd_codes.clear();
  corpus[9].icd_codes = {{"C34.1", d(2012, 1, 1)}};
  corpus[17].visits = {d(2012, 5, 5), d(2012, 5, 5)};
  corpus[23].visits = {d(2010, 1, 1), d(2010, 2, 1)};
  corpus[31].mbc_dx_date = d(2010, 6, 1);
  corpus[48].visits.clear();

  Date act = d(2011, 1, 1);
  Date cutoff = d(2018, 2, 1);
  auto got = select_candidates(corpus, act, cutoff);

  std::vector<std::string> expected;
  for (const auto& p : corpus) {
    if (has_breast_cancer_code(p.icd_codes) && meets_activity_criterion(p.visits, act) &&
        passes_immortal_time_filter(p, act))
      expected.push_back(p.patient_id);
  }
  std::sort(expected.begin(), expected.end());
  CHECK(got.patient_ids == expected);
  CHECK(got.patient_ids.size() < corpus.size());
  CHECK(std::find(got.patient_ids.begin(), got.patient_ids.end(), corpus[31].patient_id) ==
        got.patient_ids.end());

  // Order-insensitive to corpus permutation.
  Rng rng(5, 0);
  rng.shuffle(corpus);
  auto shuffled = select_candidates(corpus, act, cutoff);
  CHECK(shuffled.patient_ids == got.patient_ids);
}

TEST_CASE("select_candidates rejects an empty corpus") {
  CHECK_THROWS_AS(select_candidates({}, d(2011, 1, 1), d(2018, 2, 1)), DataError);
}

TEST_CASE("adding a qualifying visit never removes a patient") {
  GeneratorConfig cfg;
  cfg.n_patients = 40;
  cfg.seed = 12;
  auto corpus = generate_corpus(cfg);
  Date act = d(2011, 1, 1);
  auto before = select_candidates(corpus, act, d(2018, 2, 1));
  for (auto& p : corpus) p.visits.push_back(d(2015, 7, 7));
  auto after = select_candidates(corpus, act, d(2018, 2, 1));
  std::set<std::string> after_set(after.patient_ids.begin(), after.patient_ids.end());
  for (const auto& id : before.patient_ids) CHECK(after_set.count(id) == 1);
}

TEST_CASE("biomarker status from the footnote example") {
  Date dx = d(2014, 6, 1);
  std::vector<BiomarkerTest> tests = {
      {Marker::ER, add_days(dx, 10), TestResult::Positive},
      {Marker::PR, add_days(dx, -5), TestResult::Negative},
      {Marker::HER2, add_days(dx, 59), TestResult::Negative},
  };
  auto s = hr_her2_at_mbc(tests, dx);
  CHECK(s.hr == HrStatus::Positive);
  CHECK(s.her2 == Her2Status::Negative);
}

TEST_CASE("no tests resolve to unknown") {
  auto s = hr_her2_at_mbc({}, d(2014, 6, 1));
  CHECK(s.hr == HrStatus::Unknown);
  CHECK(s.her2 == Her2Status::Unknown);
}

TEST_CASE("fallback to the latest successful test before diagnosis") {
  Date dx = d(2014, 6, 1);
  std::vector<BiomarkerTest> tests = {
      {Marker::ER, add_days(dx, -90), TestResult::Negative},
      {Marker::PR, add_days(dx, -200), TestResult::Negative},
  };
  auto s = hr_her2_at_mbc(tests, dx);
  CHECK(s.hr == HrStatus::Negative);
  CHECK(s.her2 == Her2Status::Unknown);
}

TEST_CASE("unsuccessful tests never shadow a successful fallback") {
  Date dx = d(2014, 6, 1);
  std::vector<BiomarkerTest> tests = {
      {Marker::ER, add_days(dx, 1), TestResult::Pending},
      {Marker::ER, add_days(dx, -90), TestResult::Positive},
      {Marker::PR, add_days(dx, 2), TestResult::Unknown},
  };
  auto s = hr_her2_at_mbc(tests, dx);
  CHECK(s.hr == HrStatus::Positive);
}

TEST_CASE("equal distance prefers the earlier test") {
  Date dx = d(2014, 6, 1);
  std::vector<BiomarkerTest> tests = {
      {Marker::HER2, add_days(dx, 30), TestResult::Positive},
      {Marker::HER2, add_days(dx, -30), TestResult::Negative},
  };
  CHECK(hr_her2_at_mbc(tests, dx).her2 == Her2Status::Negative);
}

TEST_CASE("equivocal her2 within the window is reported") {
  Date dx = d(2014, 6, 1);
  std::vector<BiomarkerTest> tests = {
      {Marker::HER2, add_days(dx, 3), TestResult::Equivocal},
  };
  CHECK(hr_her2_at_mbc(tests, dx).her2 == Her2Status::Equivocal);
}

TEST_CASE("one negative marker alone leaves hr unknown") {
  Date dx = d(2014, 6, 1);
  std::vector<BiomarkerTest> tests = {
      {Marker::ER, add_days(dx, -30), TestResult::Negative},
  };
  CHECK(hr_her2_at_mbc(tests, dx).hr == HrStatus::Unknown);
}

TEST_CASE("randomized biomarker resolution matches the rule oracle") {
  Rng rng(77, 0);
  Date dx = d(2014, 6, 1);
  const Marker markers[3] = {Marker::ER, Marker::PR, Marker::HER2};
  const TestResult results[6] = {TestResult::Positive, TestResult::Negative,
                                 TestResult::Equivocal, TestResult::Pending,
                                 TestResult::Inconclusive, TestResult::Unknown};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<BiomarkerTest> tests;
    std::set<std::pair<int, int>> used;  // (marker, offset), keeps per-marker dates distinct
    std::size_t n = rng.below(7);
    for (std::size_t k = 0; k < n; ++k) {
      int mi = static_cast<int>(rng.below(3));
      int offset = static_cast<int>(rng.below(241)) - 120;
      if (!used.insert({mi, offset}).second) continue;
      tests.push_back({markers[mi], add_days(dx, offset), results[rng.below(6)]});
    }
    auto got = hr_her2_at_mbc(tests, dx);
    auto want = oracle_status(tests, dx);
    CHECK(got.hr == want.hr);
    CHECK(got.her2 == want.her2);
  }
}

TEST_CASE("followup months") {
  Date dx = d(2014, 6, 1);
  CHECK(followup_months(dx, dx) == 0.0);
  CHECK(followup_months(dx, add_days(dx, 36525)) == doctest::Approx(1200.0).epsilon(1e-12));
  CHECK(followup_months(dx, add_days(dx, 494)) == doctest::Approx(16.23).epsilon(0.001));
  CHECK_THROWS_AS(followup_months(dx, add_days(dx, -1)), DataError);
}

TEST_CASE("status labels") {
  CHECK(to_string(HrStatus::Positive) == "Positive");
  CHECK(to_string(Her2Status::Equivocal) == "Equivocal");
}
