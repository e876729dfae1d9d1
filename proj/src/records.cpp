#include "macs/records.hpp"

#include <fstream>

#include "macs/error.hpp"

namespace macs {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <class E, std::size_t N>
E from_string_impl(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table,
                   const char* what) {
  for (const auto& [name, value] : table)
    if (name == s) return value;
  throw DataError(std::string("unknown ") + what + ": \"" + std::string(s) + "\"");
}

constexpr std::array<std::pair<std::string_view, Gender>, 2> kGender = {
    {{"Female", Gender::Female}, {"Male", Gender::Male}}};
constexpr std::array<std::pair<std::string_view, Race>, 5> kRace = {
    {{"White", Race::White},
     {"Black or African American", Race::Black},
     {"Asian", Race::Asian},
     {"Other", Race::Other},
     {"Unknown", Race::Unknown}}};
constexpr std::array<std::pair<std::string_view, PracticeType>, 2> kPractice = {
    {{"Academic", PracticeType::Academic}, {"Community", PracticeType::Community}}};
constexpr std::array<std::pair<std::string_view, Stage>, 6> kStage = {
    {{"0", Stage::S0},
     {"I", Stage::S1},
     {"II", Stage::S2},
     {"III", Stage::S3},
     {"IV", Stage::S4},
     {"Not documented", Stage::NotDocumented}}};
constexpr std::array<std::pair<std::string_view, BrcaStatus>, 4> kBrca = {
    {{"Positive", BrcaStatus::Positive},
     {"Negative", BrcaStatus::Negative},
     {"Other", BrcaStatus::Other},
     {"Unknown", BrcaStatus::Unknown}}};
constexpr std::array<std::pair<std::string_view, Marker>, 3> kMarker = {
    {{"ER", Marker::ER}, {"PR", Marker::PR}, {"HER2", Marker::HER2}}};
constexpr std::array<std::pair<std::string_view, TestResult>, 6> kResult = {
    {{"Positive", TestResult::Positive},
     {"Negative", TestResult::Negative},
     {"Equivocal", TestResult::Equivocal},
     {"Pending", TestResult::Pending},
     {"Inconclusive", TestResult::Inconclusive},
     {"Unknown", TestResult::Unknown}}};

template <class E, std::size_t N>
std::string_view to_string_impl(E v, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "?";
}

json date_or_null(const std::optional<Date>& d) {
  if (d) return format_iso_date(*d);
  return nullptr;
}

std::optional<Date> opt_date_from(const json& j, const char* field) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  return parse_iso_date(j.at(field).get<std::string>());
}

}  // namespace

std::string_view to_string(Gender v) { return to_string_impl(v, kGender); }
std::string_view to_string(Race v) { return to_string_impl(v, kRace); }
std::string_view to_string(PracticeType v) { return to_string_impl(v, kPractice); }
std::string_view to_string(Stage v) { return to_string_impl(v, kStage); }
std::string_view to_string(BrcaStatus v) { return to_string_impl(v, kBrca); }
std::string_view to_string(Marker v) { return to_string_impl(v, kMarker); }
std::string_view to_string(TestResult v) { return to_string_impl(v, kResult); }

Gender gender_from_string(std::string_view s) { return from_string_impl(s, kGender, "gender"); }
Race race_from_string(std::string_view s) { return from_string_impl(s, kRace, "race"); }
PracticeType practice_from_string(std::string_view s) {
  return from_string_impl(s, kPractice, "practice type");
}
Stage stage_from_string(std::string_view s) { return from_string_impl(s, kStage, "stage"); }
BrcaStatus brca_from_string(std::string_view s) {
  return from_string_impl(s, kBrca, "BRCA status");
}
Marker marker_from_string(std::string_view s) { return from_string_impl(s, kMarker, "marker"); }
TestResult test_result_from_string(std::string_view s) {
  return from_string_impl(s, kResult, "test result");
}

const std::array<std::string_view, 24>& document_categories() {
  static const std::array<std::string_view, 24> kCategories = {
      "visit note",
      "pathology report",
      "procedure and operative report",
      "radiology report",
      "lab report",
      "discharge summary",
      "consult note",
      "telephone encounter",
      "medication order",
      "imaging order",
      "referral letter",
      "nursing note",
      "infusion note",
      "genetic test report",
      "insurance form",
      "patient correspondence",
      "problem list",
      "immunization record",
      "emergency department note",
      "hospital admission note",
      "anesthesia record",
      "care plan",
      "external records",
      "billing statement"};
  return kCategories;
}

nlohmann::ordered_json record_to_json(const PatientRecord& p) {
  ordered_json j;
  j["patient_id"] = p.patient_id;
  j["gender"] = to_string(p.gender);
  j["race"] = to_string(p.race);
  j["practice_type"] = to_string(p.practice_type);
  j["birth_date"] = date_or_null(p.birth_date);
  ordered_json codes = ordered_json::array();
  for (const auto& c : p.icd_codes)
    codes.push_back({{"code", c.code}, {"date", format_iso_date(c.date)}});
  j["icd_codes"] = std::move(codes);
  ordered_json visits = ordered_json::array();
  for (Date v : p.visits) visits.push_back(format_iso_date(v));
  j["visits"] = std::move(visits);
  ordered_json docs = ordered_json::array();
  for (const auto& d : p.documents)
    docs.push_back({{"doc_id", d.doc_id},
                    {"category", d.category},
                    {"date", format_iso_date(d.date)},
                    {"text", d.text}});
  j["documents"] = std::move(docs);
  ordered_json tests = ordered_json::array();
  for (const auto& t : p.biomarker_tests)
    tests.push_back({{"marker", to_string(t.marker)},
                     {"date", format_iso_date(t.date)},
                     {"result", to_string(t.result)}});
  j["biomarker_tests"] = std::move(tests);
  j["brca_status"] = to_string(p.brca_status);
  j["initial_dx_date"] = format_iso_date(p.initial_dx_date);
  j["stage_at_dx"] = to_string(p.stage_at_dx);
  j["mbc_dx_date"] = date_or_null(p.mbc_dx_date);
  j["death_date"] = date_or_null(p.death_date);
  j["last_activity_date"] = format_iso_date(p.last_activity_date);
  j["line_count"] = p.line_count;
  return j;
}

PatientRecord record_from_json(const json& j) {
  PatientRecord p;
  p.patient_id = j.at("patient_id").get<std::string>();
  p.gender = gender_from_string(j.at("gender").get<std::string>());
  p.race = race_from_string(j.at("race").get<std::string>());
  p.practice_type = practice_from_string(j.at("practice_type").get<std::string>());
  p.birth_date = opt_date_from(j, "birth_date");
  for (const auto& c : j.at("icd_codes"))
    p.icd_codes.push_back(
        {c.at("code").get<std::string>(), parse_iso_date(c.at("date").get<std::string>())});
  for (const auto& v : j.at("visits")) p.visits.push_back(parse_iso_date(v.get<std::string>()));
  for (const auto& d : j.at("documents"))
    p.documents.push_back({d.at("doc_id").get<std::string>(),
                           d.at("category").get<std::string>(),
                           parse_iso_date(d.at("date").get<std::string>()),
                           d.at("text").get<std::string>()});
  for (const auto& t : j.at("biomarker_tests"))
    p.biomarker_tests.push_back({marker_from_string(t.at("marker").get<std::string>()),
                                 parse_iso_date(t.at("date").get<std::string>()),
                                 test_result_from_string(t.at("result").get<std::string>())});
  p.brca_status = brca_from_string(j.at("brca_status").get<std::string>());
  p.initial_dx_date = parse_iso_date(j.at("initial_dx_date").get<std::string>());
  p.stage_at_dx = stage_from_string(j.at("stage_at_dx").get<std::string>());
  p.mbc_dx_date = opt_date_from(j, "mbc_dx_date");
  p.death_date = opt_date_from(j, "death_date");
  p.last_activity_date = parse_iso_date(j.at("last_activity_date").get<std::string>());
  p.line_count = j.at("line_count").get<int>();
  return p;
}

void write_corpus_ndjson(const std::string& path, const std::vector<PatientRecord>& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& p : corpus) out << record_to_json(p).dump() << '\n';
  if (!out) throw DataError("write failed: " + path);
}

std::vector<PatientRecord> read_corpus_ndjson(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::vector<PatientRecord> corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      corpus.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError("corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return corpus;
}

}  // namespace macs
