#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "macs/error.hpp"
#include "macs/records.hpp"

using namespace macs;

namespace {

PatientRecord sample_record() {
  PatientRecord p;
  p.patient_id = "P000123";
  p.gender = Gender::Female;
  p.race = Race::Black;
  p.practice_type = PracticeType::Academic;
  p.birth_date = make_date(1955, 4, 2);
  p.icd_codes = {{"C50.911", make_date(2012, 5, 1)}, {"V70.0", make_date(2013, 1, 9)}};
  p.visits = {make_date(2012, 5, 1), make_date(2013, 1, 9), make_date(2014, 6, 2)};
  p.documents = {{"D1", "visit note", make_date(2012, 5, 1), "stable disease noted"},
                 {"D2", "lab report", make_date(2012, 6, 1), "cbc within normal limits"}};
  p.biomarker_tests = {{Marker::ER, make_date(2012, 5, 10), TestResult::Positive},
                       {Marker::HER2, make_date(2012, 5, 12), TestResult::Negative}};
  p.brca_status = BrcaStatus::Negative;
  p.initial_dx_date = make_date(2012, 4, 20);
  p.stage_at_dx = Stage::S2;
  p.mbc_dx_date = make_date(2014, 3, 3);
  p.death_date = std::nullopt;
  p.last_activity_date = make_date(2016, 8, 19);
  p.line_count = 2;
  return p;
}

bool records_equal(const PatientRecord& a, const PatientRecord& b) {
  return record_to_json(a) == record_to_json(b);
}

}  // namespace

TEST_CASE("enum labels round trip") {
  CHECK(to_string(Race::Black) == "Black or African American");
  CHECK(to_string(Race::Other) == "Other");
  CHECK(to_string(Stage::S0) == "0");
  CHECK(to_string(Stage::NotDocumented) == "Not documented");
  CHECK(to_string(TestResult::Equivocal) == "Equivocal");
  CHECK(gender_from_string("Male") == Gender::Male);
  CHECK(race_from_string("Black or African American") == Race::Black);
  CHECK(practice_from_string("Community") == PracticeType::Community);
  CHECK(stage_from_string("IV") == Stage::S4);
  CHECK(brca_from_string("Other") == BrcaStatus::Other);
  CHECK(marker_from_string("HER2") == Marker::HER2);
  CHECK(test_result_from_string("Inconclusive") == TestResult::Inconclusive);
}

TEST_CASE("unknown enum labels throw") {
  CHECK_THROWS_AS(gender_from_string("?"), DataError);
  CHECK_THROWS_AS(stage_from_string("V"), DataError);
  CHECK_THROWS_AS(test_result_from_string("Maybe"), DataError);
}

TEST_CASE("document category roster") {
  const auto& cats = document_categories();
  CHECK(cats.size() == 24);
  CHECK(cats[0] == "visit note");
  for (std::size_t i = 0; i < cats.size(); ++i)
    for (std::size_t j = i + 1; j < cats.size(); ++j) CHECK(cats[i] != cats[j]);
}

TEST_CASE("record json round trip") {
  PatientRecord p = sample_record();
  PatientRecord q = record_from_json(record_to_json(p));
  CHECK(records_equal(p, q));

  p.mbc_dx_date = std::nullopt;
  p.birth_date = std::nullopt;
  PatientRecord r = record_from_json(record_to_json(p));
  CHECK(records_equal(p, r));
  CHECK_FALSE(r.is_positive());
}

TEST_CASE("dates serialized as iso strings") {
  auto j = record_to_json(sample_record());
  CHECK(j["initial_dx_date"] == "2012-04-20");
  CHECK(j["mbc_dx_date"] == "2014-03-03");
  CHECK(j["death_date"].is_null());
}

TEST_CASE("ndjson corpus round trip") {
  std::vector<PatientRecord> corpus;
  for (int i = 0; i < 5; ++i) {
    PatientRecord p = sample_record();
    p.patient_id = "P" + std::to_string(i);
    if (i % 2) p.mbc_dx_date = std::nullopt;
    corpus.push_back(p);
  }
  auto path = (std::filesystem::temp_directory_path() / "macs_records_test.ndjson").string();
  write_corpus_ndjson(path, corpus);
  auto loaded = read_corpus_ndjson(path);
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(records_equal(corpus[i], loaded[i]));
  std::remove(path.c_str());
}

TEST_CASE("reading a missing corpus throws") {
  CHECK_THROWS_AS(read_corpus_ndjson("/nonexistent/nowhere.ndjson"), DataError);
}
