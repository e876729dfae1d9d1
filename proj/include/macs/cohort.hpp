#pragma once

#include <string>
#include <vector>

#include "macs/dates.hpp"
#include "macs/records.hpp"

namespace macs {

struct CandidateSet {
  std::vector<std::string> patient_ids;
  Date cutoff_date = make_date(2018, 2, 1);
  Date activity_date = make_date(2011, 1, 1);
};

enum class HrStatus { Positive, Negative, Unknown };
enum class Her2Status { Positive, Negative, Equivocal, Unknown };

std::string_view to_string(HrStatus v);
std::string_view to_string(Her2Status v);

struct BiomarkerStatus {
  HrStatus hr = HrStatus::Unknown;
  Her2Status her2 = Her2Status::Unknown;
};

// True iff any code, uppercased with "." deleted, starts with 174, 175, or C50.
bool has_breast_cancer_code(const std::vector<IcdCode>& codes);

// True iff at least two distinct visit dates fall strictly after activity_date.
bool meets_activity_criterion(const std::vector<Date>& visits, Date activity_date);

// False iff the metastatic diagnosis predates activity_date; negatives pass.
bool passes_immortal_time_filter(const PatientRecord& patient, Date activity_date);

CandidateSet select_candidates(const std::vector<PatientRecord>& corpus, Date activity_date,
                               Date cutoff_date);

// Per marker: closest successful test within 60 days of mbc_dx_date, ties
// preferring the earlier test; else the latest successful test before it;
// tests with pending, inconclusive, or unknown results never resolve a status.
BiomarkerStatus hr_her2_at_mbc(const std::vector<BiomarkerTest>& tests, Date mbc_dx_date);

// Days between the dates divided by 30.4375. Throws DataError on negative spans.
double followup_months(Date mbc_dx_date, Date last_activity_date);

}  // namespace macs
