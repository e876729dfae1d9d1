#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "macs/records.hpp"
#include "macs/rng.hpp"
#include "macs/stats.hpp"

namespace macs {

struct CohortPair {
  std::vector<std::string> reference_ids;  // all test positives, sorted
  std::vector<std::string> macs_ids;       // flagged test positives, sorted subset
};

CohortPair build_cohorts(const std::vector<std::string>& test_ids,
                         const std::vector<bool>& labels, const std::vector<bool>& flags);

struct CharacteristicSpec {
  enum class Kind { Categorical, Continuous };
  std::string name;
  Kind kind = Kind::Categorical;
  std::function<std::string(const PatientRecord&)> category_of;
  std::function<std::optional<double>(const PatientRecord&)> value_of;
  std::vector<std::string> category_order;
};

// The fixed baseline-characteristics roster: ages at both diagnoses (medians
// and bins), gender, race/ethnicity, practice type, stage, HR and HER2 status,
// BRCA status, visit count, lines of therapy, follow-up months, and year of
// metastatic diagnosis.
std::vector<CharacteristicSpec> standard_characteristics();

struct BiasRow {
  std::string characteristic;
  CharacteristicSpec::Kind kind = CharacteristicSpec::Kind::Categorical;
  std::string level;             // empty for continuous rows
  std::size_t ref_count = 0;     // level count, or contributing n for medians
  double ref_value = 0.0;        // percent, or median
  double ref_iqr_lo = 0.0;
  double ref_iqr_hi = 0.0;
  std::size_t macs_count = 0;
  double macs_value = 0.0;
  double macs_iqr_lo = 0.0;
  double macs_iqr_hi = 0.0;
  double difference = 0.0;       // reference minus MACS
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool suppressed = false;       // a categorical cell count is below 5
};

// Row r uses stream derive(rng, r); categorical levels sub-derive with the
// level's position in the emitted list, continuous rows with 0. True counts
// feed every statistic; suppression is applied by the serializers only.
std::vector<BiasRow> compare_characteristics(const CohortPair& pair,
                                             const std::vector<PatientRecord>& patients,
                                             const std::vector<CharacteristicSpec>& specs,
                                             std::size_t n_boot, RngSpec rng);

struct CohortSurvival {
  std::size_t n = 0;
  std::size_t events = 0;
  KMCurve curve;
  std::optional<double> median_days;
  MedianCi median_ci;  // days
};

struct SurvivalComparison {
  std::string name;
  CohortSurvival reference;
  CohortSurvival macs;
  DiffCi median_diff_days;  // reference minus MACS
};

struct ExampleAnalyses {
  SurvivalComparison overall;
  SurvivalComparison hrpos_her2neg;
  SurvivalComparison triple_negative;
  LogrankResult logrank_reference;  // HR+/HER2- vs triple negative
  LogrankResult logrank_macs;
};

// Overall survival from metastatic diagnosis to death, censored at the last
// confirmed activity date, for both cohorts and the two biomarker subgroups.
// Streams: derive(rng, k), k = 3*analysis + {0 ref CI, 1 macs CI, 2 diff}
// with analyses ordered overall, HR+/HER2-, triple negative.
ExampleAnalyses run_example_analyses(const CohortPair& pair,
                                     const std::vector<PatientRecord>& patients,
                                     std::size_t n_boot, RngSpec rng);

nlohmann::ordered_json bias_rows_to_json(const std::vector<BiasRow>& rows);
nlohmann::ordered_json example_analyses_to_json(const ExampleAnalyses& analyses);
std::string bias_rows_csv(const std::vector<BiasRow>& rows);
std::string km_curve_csv(const KMCurve& curve);

}  // namespace macs
