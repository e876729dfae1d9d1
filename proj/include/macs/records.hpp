#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "macs/dates.hpp"

namespace macs {

enum class Gender { Female, Male };
enum class Race { White, Black, Asian, Other, Unknown };
enum class PracticeType { Academic, Community };
enum class Stage { S0, S1, S2, S3, S4, NotDocumented };
enum class BrcaStatus { Positive, Negative, Other, Unknown };
enum class Marker { ER, PR, HER2 };
enum class TestResult { Positive, Negative, Equivocal, Pending, Inconclusive, Unknown };

std::string_view to_string(Gender v);
std::string_view to_string(Race v);
std::string_view to_string(PracticeType v);
std::string_view to_string(Stage v);
std::string_view to_string(BrcaStatus v);
std::string_view to_string(Marker v);
std::string_view to_string(TestResult v);

Gender gender_from_string(std::string_view s);
Race race_from_string(std::string_view s);
PracticeType practice_from_string(std::string_view s);
Stage stage_from_string(std::string_view s);
BrcaStatus brca_from_string(std::string_view s);
Marker marker_from_string(std::string_view s);
TestResult test_result_from_string(std::string_view s);

// The 24 standard document categories. The first four are the ones feature
// generation keeps (visit notes, pathology, procedure/operative, radiology).
const std::array<std::string_view, 24>& document_categories();

struct IcdCode {
  std::string code;
  Date date;
};

struct Document {
  std::string doc_id;
  std::string category;
  Date date;
  std::string text;
};

struct BiomarkerTest {
  Marker marker = Marker::ER;
  Date date;
  TestResult result = TestResult::Unknown;
};

// One patient's structured and unstructured record. mbc_dx_date doubles as
// the ground-truth label: present iff the patient has metastatic disease.
struct PatientRecord {
  std::string patient_id;
  Gender gender = Gender::Female;
  Race race = Race::Unknown;
  PracticeType practice_type = PracticeType::Community;
  std::optional<Date> birth_date;
  std::vector<IcdCode> icd_codes;
  std::vector<Date> visits;
  std::vector<Document> documents;
  std::vector<BiomarkerTest> biomarker_tests;
  BrcaStatus brca_status = BrcaStatus::Unknown;
  Date initial_dx_date;
  Stage stage_at_dx = Stage::NotDocumented;
  std::optional<Date> mbc_dx_date;
  std::optional<Date> death_date;
  Date last_activity_date;
  int line_count = 0;

  bool is_positive() const { return mbc_dx_date.has_value(); }
};

nlohmann::ordered_json record_to_json(const PatientRecord& p);
PatientRecord record_from_json(const nlohmann::json& j);

// Newline-delimited JSON, one record per line, in corpus order.
void write_corpus_ndjson(const std::string& path, const std::vector<PatientRecord>& corpus);
std::vector<PatientRecord> read_corpus_ndjson(const std::string& path);

}  // namespace macs
