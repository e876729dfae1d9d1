#include <doctest.h>

#include <set>
#include <sstream>
#include <string>

#include "macs/cohort.hpp"
#include "macs/datagen.hpp"
#include "macs/error.hpp"

using namespace macs;

namespace {

std::string corpus_bytes(const std::vector<PatientRecord>& corpus) {
  std::ostringstream out;
  for (const auto& p : corpus) out << record_to_json(p).dump() << '\n';
  return out.str();
}

std::size_t count_positives(const std::vector<PatientRecord>& corpus) {
  std::size_t n = 0;
  for (const auto& p : corpus) n += p.is_positive();
  return n;
}

bool has_indicator_token(const std::string& text, const std::set<std::string>& indicators) {
  std::istringstream in(text);
  std::string tok;
  while (in >> tok)
    if (indicators.count(tok)) return true;
  return false;
}

}  // namespace

TEST_CASE("token dictionaries are sized and disjoint") {
  const auto& d = token_dictionaries();
  CHECK(d.background.size() >= 200);
  CHECK(d.indicator.size() >= 20);
  CHECK(d.confusable.size() >= 10);

  std::set<std::string_view> bg(d.background.begin(), d.background.end());
  std::set<std::string_view> ind(d.indicator.begin(), d.indicator.end());
  std::set<std::string_view> conf(d.confusable.begin(), d.confusable.end());
  CHECK(bg.size() == d.background.size());
  CHECK(ind.size() == d.indicator.size());
  CHECK(conf.size() == d.confusable.size());
  for (auto t : ind) CHECK(bg.count(t) == 0);
  for (auto t : conf) {
    CHECK(bg.count(t) == 0);
    CHECK(ind.count(t) == 0);
  }
  CHECK(ind.count("metastatic") == 1);
  CHECK(ind.count("metastases") == 1);
  CHECK(ind.count("bone") == 1);
  CHECK(ind.count("liver") == 1);
}

TEST_CASE("n_patients zero gives an empty corpus") {
  GeneratorConfig cfg;
  cfg.n_patients = 0;
  cfg.seed = 1;
  CHECK(generate_corpus(cfg).empty());
}

TEST_CASE("identical config gives byte-identical corpora") {
  GeneratorConfig cfg;
  cfg.n_patients = 500;
  cfg.seed = 5;
  auto a = generate_corpus(cfg);
  auto b = generate_corpus(cfg);
  CHECK(corpus_bytes(a) == corpus_bytes(b));
}

TEST_CASE("different seeds give different corpora") {
  GeneratorConfig cfg;
  cfg.n_patients = 50;
  cfg.seed = 7;
  auto a = generate_corpus(cfg);
  cfg.seed = 8;
  auto b = generate_corpus(cfg);
  CHECK(corpus_bytes(a) != corpus_bytes(b));
}

TEST_CASE("positive count near the configured prevalence at n=20000 seed 7") {
  GeneratorConfig cfg;
  cfg.n_patients = 20000;
  cfg.seed = 7;
  std::size_t positives = count_positives(generate_corpus(cfg));
  // Central 99.9% interval of Binomial(20000, 0.0859), from an exact CDF scan.
  CHECK(positives >= 1589);
  CHECK(positives <= 1850);
}

TEST_CASE("prevalence stays within 1.5 points across seeds") {
  GeneratorConfig cfg;
  cfg.n_patients = 20000;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    double phat = static_cast<double>(count_positives(generate_corpus(cfg))) / cfg.n_patients;
    CHECK(std::abs(phat - cfg.prevalence) < 0.015);
  }
}

TEST_CASE("structural invariants hold per patient") {
  GeneratorConfig cfg;
  cfg.n_patients = 2000;
  cfg.seed = 3;
  auto corpus = generate_corpus(cfg);
  REQUIRE(corpus.size() == cfg.n_patients);
  std::set<std::string> ids;
  Date activity = make_date(2011, 1, 1);
  for (const auto& p : corpus) {
    ids.insert(p.patient_id);
    CHECK(has_breast_cancer_code(p.icd_codes));
    CHECK(meets_activity_criterion(p.visits, activity));
    if (p.mbc_dx_date) {
      CHECK(p.initial_dx_date <= *p.mbc_dx_date);
      CHECK(*p.mbc_dx_date <= cfg.end_date);
      if (p.death_date) CHECK(*p.mbc_dx_date <= *p.death_date);
    } else {
      CHECK_FALSE(p.death_date.has_value());
    }
    for (const auto& v : p.visits) CHECK(v <= p.last_activity_date);
    for (const auto& doc : p.documents) {
      CHECK(doc.date <= cfg.end_date);
      CHECK_FALSE(doc.text.empty());
    }
    CHECK(p.last_activity_date <= cfg.end_date);
  }
  CHECK(ids.size() == corpus.size());
}

TEST_CASE("indicator tokens concentrate in positive relevant documents") {
  GeneratorConfig cfg;
  cfg.n_patients = 2000;
  cfg.seed = 9;
  auto corpus = generate_corpus(cfg);
  const auto& d = token_dictionaries();
  std::set<std::string> indicators;
  for (auto t : d.indicator) indicators.insert(std::string(t));
  std::set<std::string> relevant = {"visit note", "pathology report",
                                    "procedure and operative report", "radiology report"};

  std::size_t pos_docs = 0, pos_hits = 0, neg_docs = 0, neg_hits = 0;
  for (const auto& p : corpus) {
    for (const auto& doc : p.documents) {
      if (!relevant.count(doc.category)) continue;
      if (p.mbc_dx_date) {
        if (doc.date < add_days(*p.mbc_dx_date, -60)) continue;
        ++pos_docs;
        pos_hits += has_indicator_token(doc.text, indicators);
      } else {
        ++neg_docs;
        neg_hits += has_indicator_token(doc.text, indicators);
      }
    }
  }
  REQUIRE(pos_docs > 200);
  REQUIRE(neg_docs > 2000);
  double pos_rate = static_cast<double>(pos_hits) / pos_docs;
  double neg_rate = static_cast<double>(neg_hits) / neg_docs;
  CHECK(pos_rate > 0.80);
  CHECK(pos_rate < 0.90);
  CHECK(neg_rate < 0.10);
  CHECK(neg_rate > 0.0);
}

TEST_CASE("config validation names the violated constraint") {
  GeneratorConfig cfg;
  cfg.n_patients = 10;
  cfg.prevalence = 0.0;
  CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
  cfg.prevalence = 0.1;
  cfg.leak_rate = 0.9;
  cfg.signal_strength = 0.8;
  CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
  cfg = GeneratorConfig{};
  cfg.start_date = cfg.end_date;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = GeneratorConfig{};
  cfg.survival_median_tn_years = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = GeneratorConfig{};
  cfg.censor_rate = 1.5;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("generator config json round trip") {
  GeneratorConfig cfg;
  cfg.n_patients = 123;
  cfg.seed = 99;
  cfg.prevalence = 0.12;
  cfg.signal_strength = 0.7;
  cfg.leak_rate = 0.02;
  cfg.start_date = make_date(2010, 6, 1);
  cfg.end_date = make_date(2017, 3, 4);
  cfg.survival_median_hrpos_years = 2.5;
  cfg.survival_median_tn_years = 1.0;
  cfg.censor_rate = 0.3;
  GeneratorConfig back = generator_config_from_json(generator_config_to_json(cfg));
  CHECK(generator_config_to_json(back) == generator_config_to_json(cfg));
}
