#include "macs/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <optional>

#include "macs/error.hpp"

namespace macs {
namespace {

bool is_successful(TestResult r) {
  return r == TestResult::Positive || r == TestResult::Negative || r == TestResult::Equivocal;
}

// Two-stage selection per marker over successful tests only: closest test
// within the window (distance ties prefer the non-post-dx test, then input
// order), else the latest test strictly before the diagnosis date. Tests with
// pending, inconclusive, or unknown results can be date-selected by the same
// rule but never resolve a status, so they reduce to "no result" here.
std::optional<TestResult> resolved_result(const std::vector<BiomarkerTest>& tests, Marker marker,
                                          Date mbc) {
  constexpr std::int32_t kWindowDays = 60;
  const BiomarkerTest* best = nullptr;
  std::int32_t best_dist = 0;
  int best_post = 0;
  for (const auto& t : tests) {
    if (t.marker != marker || !is_successful(t.result)) continue;
    std::int32_t dist = std::abs(days_between(mbc, t.date));
    if (dist > kWindowDays) continue;
    int post = mbc < t.date ? 1 : 0;
    if (!best || dist < best_dist || (dist == best_dist && post < best_post)) {
      best = &t;
      best_dist = dist;
      best_post = post;
    }
  }
  if (!best) {
    for (const auto& t : tests) {
      if (t.marker != marker || !is_successful(t.result)) continue;
      if (!(t.date < mbc)) continue;
      if (!best || best->date < t.date) best = &t;
    }
  }
  if (!best) return std::nullopt;
  return best->result;
}

}  // namespace

std::string_view to_string(HrStatus v) {
  switch (v) {
    case HrStatus::Positive: return "Positive";
    case HrStatus::Negative: return "Negative";
    case HrStatus::Unknown: return "Unknown";
  }
  return "?";
}

std::string_view to_string(Her2Status v) {
  switch (v) {
    case Her2Status::Positive: return "Positive";
    case Her2Status::Negative: return "Negative";
    case Her2Status::Equivocal: return "Equivocal";
    case Her2Status::Unknown: return "Unknown";
  }
  return "?";
}

bool has_breast_cancer_code(const std::vector<IcdCode>& codes) {
  for (const auto& c : codes) {
    std::string norm;
    norm.reserve(c.code.size());
    for (char ch : c.code) {
      if (ch == '.') continue;
      norm.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    }
    if (norm.rfind("174", 0) == 0 || norm.rfind("175", 0) == 0 || norm.rfind("C50", 0) == 0)
      return true;
  }
  return false;
}

bool meets_activity_criterion(const std::vector<Date>& visits, Date activity_date) {
  std::vector<Date> after;
  for (Date v : visits)
    if (activity_date < v) after.push_back(v);
  std::sort(after.begin(), after.end());
  after.erase(std::unique(after.begin(), after.end()), after.end());
  return after.size() >= 2;
}

bool passes_immortal_time_filter(const PatientRecord& patient, Date activity_date) {
  return !(patient.mbc_dx_date && *patient.mbc_dx_date < activity_date);
}

CandidateSet select_candidates(const std::vector<PatientRecord>& corpus, Date activity_date,
                               Date cutoff_date) {
  if (corpus.empty()) throw DataError("select_candidates: empty corpus");
  CandidateSet out;
  out.activity_date = activity_date;
  out.cutoff_date = cutoff_date;
  for (const auto& p : corpus) {
    if (!has_breast_cancer_code(p.icd_codes)) continue;
    if (!meets_activity_criterion(p.visits, activity_date)) continue;
    if (!passes_immortal_time_filter(p, activity_date)) continue;
    out.patient_ids.push_back(p.patient_id);
  }
  std::sort(out.patient_ids.begin(), out.patient_ids.end());
  return out;
}

BiomarkerStatus hr_her2_at_mbc(const std::vector<BiomarkerTest>& tests, Date mbc_dx_date) {
  BiomarkerStatus status;
  auto er = resolved_result(tests, Marker::ER, mbc_dx_date);
  auto pr = resolved_result(tests, Marker::PR, mbc_dx_date);
  bool er_pos = er && *er == TestResult::Positive;
  bool pr_pos = pr && *pr == TestResult::Positive;
  bool er_neg = er && *er == TestResult::Negative;
  bool pr_neg = pr && *pr == TestResult::Negative;
  if (er_pos || pr_pos)
    status.hr = HrStatus::Positive;
  else if (er_neg && pr_neg)
    status.hr = HrStatus::Negative;
  else
    status.hr = HrStatus::Unknown;

  auto her2 = resolved_result(tests, Marker::HER2, mbc_dx_date);
  if (!her2)
    status.her2 = Her2Status::Unknown;
  else if (*her2 == TestResult::Positive)
    status.her2 = Her2Status::Positive;
  else if (*her2 == TestResult::Negative)
    status.her2 = Her2Status::Negative;
  else
    status.her2 = Her2Status::Equivocal;
  return status;
}

double followup_months(Date mbc_dx_date, Date last_activity_date) {
  std::int32_t span = days_between(mbc_dx_date, last_activity_date);
  if (span < 0) throw DataError("followup_months: last activity precedes diagnosis");
  return static_cast<double>(span) / 30.4375;
}

}  // namespace macs
