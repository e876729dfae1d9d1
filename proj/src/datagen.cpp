#include "macs/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "macs/error.hpp"
#include "macs/rng.hpp"

namespace macs {
namespace {

const std::vector<std::string_view> kBackground = {
    "patient", "presents", "clinic", "followup", "interval", "routine",
    "history", "examination", "vitals", "stable", "blood", "pressure",
    "heart", "rate", "temperature", "respiratory", "oxygen", "saturation",
    "weight", "height", "denies", "mild", "moderate", "severe",
    "fatigue", "nausea", "vomiting", "appetite", "pain", "controlled",
    "medication", "tolerated", "well", "continue", "current", "regimen",
    "discussed", "plan", "return", "weeks", "months", "laboratory",
    "values", "within", "normal", "limits", "complete", "count",
    "metabolic", "panel", "glucose", "creatinine", "sodium", "potassium",
    "calcium", "hemoglobin", "hematocrit", "platelets", "neutrophil", "lymphocyte",
    "white", "cells", "chemistry", "enzymes", "alkaline", "phosphatase",
    "bilirubin", "albumin", "protein", "urinalysis", "unremarkable", "breast",
    "left", "right", "bilateral", "lump", "palpable", "tenderness",
    "swelling", "lymph", "nodes", "axillary", "core", "needle",
    "specimen", "tissue", "margins", "grade", "tumor", "size",
    "centimeters", "ductal", "lobular", "carcinoma", "situ", "invasive",
    "receptor", "estrogen", "progesterone", "immunohistochemistry", "staining", "percent",
    "ratio", "score", "assessment", "impression", "recommend", "schedule",
    "mammogram", "ultrasound", "appearance", "consistent", "benign", "calcifications",
    "density", "architecture", "skin", "nipple", "areola", "retraction",
    "chest", "abdomen", "pelvis", "technique", "comparison", "contrast",
    "study", "unchanged", "postsurgical", "scar", "seroma", "resolved",
    "incision", "healing", "sutures", "removed", "drain", "output",
    "physical", "therapy", "range", "motion", "arm", "mobility",
    "chemotherapy", "cycle", "infusion", "premedication", "antiemetic", "dexamethasone",
    "doxorubicin", "cyclophosphamide", "paclitaxel", "docetaxel", "trastuzumab", "tamoxifen",
    "letrozole", "anastrozole", "exemestane", "fulvestrant", "capecitabine", "gemcitabine",
    "neutropenia", "anemia", "thrombocytopenia", "neuropathy", "mucositis", "alopecia",
    "radiation", "fractions", "boost", "field", "tolerance", "erythema",
    "surgical", "lumpectomy", "mastectomy", "reconstruction", "expander", "implant",
    "sentinel", "dissection", "frozen", "section", "permanent", "pathology",
    "consult", "referral", "second", "opinion", "genetics", "counseling",
    "family", "mother", "sister", "daughter", "aunt", "grandmother",
    "social", "smoking", "alcohol", "exercise", "diet", "supplements",
    "allergies", "penicillin", "sulfa", "latex", "none", "reviewed",
    "systems", "constitutional", "cardiovascular", "gastrointestinal", "musculoskeletal", "neurological",
    "psychiatric", "endocrine", "hematologic", "integumentary", "immunologic", "otherwise",
    "sleep", "energy", "hydration", "ambulating", "independent", "baseline",
    "orders", "placed", "follow", "instructions", "provided", "questions",
};

const std::vector<std::string_view> kIndicator = {
    "metastatic", "metastases", "metastasis", "mets",
    "osseous",    "skeletal",   "hepatic",    "pleural",
    "cranial",    "vertebral",  "lytic",      "sclerotic",
    "carcinomatosis", "dissemination", "disseminated", "infiltration",
    "bone",       "liver",      "lung",       "brain",
    "distant",    "spread",     "secondary",  "progression",
};

const std::vector<std::string_view> kConfusable = {
    "no evidence of metastatic disease",
    "metastasis ruled out",
    "screening negative for metastases",
    "no metastatic involvement identified",
    "without evidence of distant spread",
    "surveillance shows no metastases",
    "rules out osseous metastasis",
    "no suspicious bone findings",
    "liver imaging negative for lesions",
    "no hepatic involvement seen",
    "workup negative for metastatic disease",
    "imaging rules out distant disease",
};

enum class Subgroup { HrPosHer2Neg, TripleNegative, HrPosHer2Pos, HrNegHer2Pos };

std::string pad6(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", i);
  return buf;
}

Date clamp_date(Date d, Date lo, Date hi) { return d < lo ? lo : (hi < d ? hi : d); }

Date uniform_date(Rng& rng, Date lo, Date hi) {
  if (hi < lo) return lo;
  return add_days(lo, static_cast<std::int32_t>(rng.below(
                          static_cast<std::uint64_t>(days_between(lo, hi)) + 1)));
}

std::string make_text(Rng& rng, std::size_t n_words) {
  std::string text;
  text.reserve(n_words * 9);
  for (std::size_t k = 0; k < n_words; ++k) {
    if (k) text.push_back(' ');
    text.append(kBackground[rng.below(kBackground.size())]);
  }
  return text;
}

void insert_words(Rng& rng, std::string& text, std::string_view words) {
  std::vector<std::size_t> gaps = {0};
  for (std::size_t i = 0; i < text.size(); ++i)
    if (text[i] == ' ') gaps.push_back(i + 1);
  std::size_t at = gaps[rng.below(gaps.size())];
  std::string insert(words);
  insert.push_back(' ');
  if (at == text.size() && !text.empty()) {
    text.push_back(' ');
    text.append(words);
  } else {
    text.insert(at, insert);
  }
}

bool is_relevant_category(std::string_view cat) {
  return cat == "visit note" || cat == "pathology report" ||
         cat == "procedure and operative report" || cat == "radiology report";
}

std::string_view draw_category(Rng& rng) {
  double u = rng.next_double();
  if (u < 0.50) return "visit note";
  if (u < 0.62) return "radiology report";
  if (u < 0.72) return "pathology report";
  if (u < 0.78) return "procedure and operative report";
  const auto& cats = document_categories();
  while (true) {
    std::string_view c = cats[rng.below(cats.size())];
    if (!is_relevant_category(c)) return c;
  }
}

PatientRecord generate_patient(const GeneratorConfig& cfg, std::size_t index, RngSpec base) {
  Rng rng(derive(base, index));
  PatientRecord p;
  p.patient_id = "P" + pad6(index);

  const Date start = cfg.start_date;
  const Date end = cfg.end_date;
  const Date act_floor = make_date(2011, 1, 1);

  bool positive = rng.bernoulli(cfg.prevalence);
  p.gender = rng.bernoulli(0.0074) ? Gender::Male : Gender::Female;
  {
    double u = rng.next_double();
    p.race = u < 0.645   ? Race::White
             : u < 0.760 ? Race::Black
             : u < 0.791 ? Race::Asian
             : u < 0.905 ? Race::Other
                         : Race::Unknown;
  }
  p.practice_type = rng.bernoulli(0.067) ? PracticeType::Academic : PracticeType::Community;
  {
    double u = rng.next_double();
    p.brca_status = u < 0.030   ? BrcaStatus::Positive
                    : u < 0.212 ? BrcaStatus::Negative
                    : u < 0.218 ? BrcaStatus::Other
                                : BrcaStatus::Unknown;
  }

  Date mbc{};
  Subgroup subgroup = Subgroup::HrPosHer2Neg;
  bool de_novo = false;
  if (positive) {
    Date mbc_lo = clamp_date(act_floor, start, add_days(end, -1));
    Date pre_hi = std::min(add_days(act_floor, -1), add_days(end, -1));
    if (start < act_floor && !(pre_hi < start) && rng.bernoulli(0.024)) {
      mbc = uniform_date(rng, start, pre_hi);
    } else {
      mbc = uniform_date(rng, mbc_lo, add_days(end, -1));
    }
    de_novo = rng.bernoulli(0.31);
    std::int32_t delay =
        de_novo ? static_cast<std::int32_t>(rng.below(61))
                : static_cast<std::int32_t>(183 + rng.below(2740));
    p.initial_dx_date = add_days(mbc, -delay);
    p.mbc_dx_date = mbc;
    if (de_novo) {
      p.stage_at_dx = Stage::S4;
    } else {
      double u = rng.next_double();
      p.stage_at_dx = u < 0.007   ? Stage::S0
                      : u < 0.140 ? Stage::S1
                      : u < 0.490 ? Stage::S2
                      : u < 0.795 ? Stage::S3
                                  : Stage::NotDocumented;
    }
    double u = rng.next_double();
    subgroup = u < 0.72   ? Subgroup::HrPosHer2Neg
               : u < 0.90 ? Subgroup::TripleNegative
               : u < 0.93 ? Subgroup::HrPosHer2Pos
                          : Subgroup::HrNegHer2Pos;
  } else {
    Date dx_hi = add_days(end, -90);
    p.initial_dx_date = uniform_date(rng, start, dx_hi < start ? start : dx_hi);
    double u = rng.next_double();
    p.stage_at_dx = u < 0.10   ? Stage::S0
                    : u < 0.46 ? Stage::S1
                    : u < 0.76 ? Stage::S2
                    : u < 0.90 ? Stage::S3
                               : Stage::NotDocumented;
  }

  if (!rng.bernoulli(0.009)) {
    double age_years = rng.normal(59.0, 13.0);
    age_years = std::min(std::max(age_years, 21.0), 93.0);
    p.birth_date = add_days(p.initial_dx_date,
                            -static_cast<std::int32_t>(std::llround(age_years * 365.25)));
  }

  const Date entry =
      clamp_date(p.initial_dx_date, start, std::max(start, add_days(end, -30)));
  // Floor on last activity so two distinct qualifying visit dates always fit.
  const Date la_floor =
      std::min(end, std::max(add_days(act_floor, 2), add_days(entry, 1)));

  Date last{};
  if (positive) {
    double median_years = (subgroup == Subgroup::TripleNegative)
                              ? cfg.survival_median_tn_years
                              : cfg.survival_median_hrpos_years;
    double t_years = rng.exponential(std::log(2.0) / median_years);
    Date death_cand =
        add_days(mbc, static_cast<std::int32_t>(std::llround(t_years * 365.25)));
    death_cand = std::max(death_cand, add_days(mbc, 2));
    if (mbc < act_floor && act_floor < end)
      death_cand = std::max(death_cand, add_days(act_floor, 31));
    death_cand = std::max(death_cand, la_floor);
    Date censor_cand = end;
    if (rng.bernoulli(cfg.censor_rate)) censor_cand = uniform_date(rng, mbc, end);
    if (death_cand <= censor_cand && !(end < death_cand)) {
      p.death_date = death_cand;
      last = death_cand;
    } else {
      last = std::max(std::min(censor_cand, end), std::max(la_floor, mbc));
    }
  } else {
    last = std::max(uniform_date(rng, entry, end), la_floor);
  }
  p.last_activity_date = last;

  std::size_t n_visits = 8 + rng.below(60);
  p.visits.reserve(n_visits + 2);
  for (std::size_t k = 0; k < n_visits; ++k) p.visits.push_back(uniform_date(rng, entry, last));
  p.visits.push_back(last);
  p.visits.push_back(add_days(last, -1) < entry ? last : add_days(last, -1));
  std::sort(p.visits.begin(), p.visits.end());

  static const std::vector<std::string_view> kBreastCodes = {
      "C50.911", "174.9", "C50.912", "174.8", "C50.919", "175.9"};
  static const std::vector<std::string_view> kOtherCodes = {
      "V70.0", "E11.9", "I10", "Z00.00", "M54.5"};
  std::size_t n_bc = 1 + rng.below(3);
  for (std::size_t k = 0; k < n_bc; ++k) {
    Date cd = clamp_date(add_days(entry, static_cast<std::int32_t>(rng.below(90))), entry, last);
    p.icd_codes.push_back({std::string(kBreastCodes[rng.below(kBreastCodes.size())]), cd});
  }
  if (rng.bernoulli(0.5)) {
    std::size_t n_other = 1 + rng.below(2);
    for (std::size_t k = 0; k < n_other; ++k)
      p.icd_codes.push_back({std::string(kOtherCodes[rng.below(kOtherCodes.size())]),
                             uniform_date(rng, entry, last)});
  }

  if (positive) {
    bool hr_pos = subgroup == Subgroup::HrPosHer2Neg || subgroup == Subgroup::HrPosHer2Pos;
    bool her2_pos = subgroup == Subgroup::HrPosHer2Pos || subgroup == Subgroup::HrNegHer2Pos;
    bool hr_recorded = !rng.bernoulli(0.03);
    bool her2_recorded = !rng.bernoulli(0.03);
    bool her2_equivocal = her2_recorded && !her2_pos && rng.bernoulli(0.02);

    auto near_mbc = [&]() {
      return add_days(mbc, static_cast<std::int32_t>(rng.below(121)) - 60);
    };
    TestResult er, pr;
    if (hr_pos) {
      er = rng.bernoulli(0.85) ? TestResult::Positive : TestResult::Negative;
      pr = rng.bernoulli(0.60) ? TestResult::Positive : TestResult::Negative;
      if (er != TestResult::Positive && pr != TestResult::Positive) er = TestResult::Positive;
    } else {
      er = TestResult::Negative;
      pr = TestResult::Negative;
    }
    if (hr_recorded) {
      p.biomarker_tests.push_back({Marker::ER, near_mbc(), er});
      p.biomarker_tests.push_back({Marker::PR, near_mbc(), pr});
    } else {
      p.biomarker_tests.push_back({Marker::ER, near_mbc(), TestResult::Pending});
      p.biomarker_tests.push_back({Marker::PR, near_mbc(), TestResult::Unknown});
    }
    if (her2_recorded) {
      TestResult h = her2_pos          ? TestResult::Positive
                     : her2_equivocal  ? TestResult::Equivocal
                                       : TestResult::Negative;
      p.biomarker_tests.push_back({Marker::HER2, near_mbc(), h});
    } else {
      p.biomarker_tests.push_back({Marker::HER2, near_mbc(), TestResult::Pending});
    }
    if (rng.bernoulli(0.15))
      p.biomarker_tests.push_back({Marker::HER2, near_mbc(), TestResult::Inconclusive});
    if (rng.bernoulli(0.20))
      p.biomarker_tests.push_back(
          {Marker::ER, add_days(mbc, -static_cast<std::int32_t>(61 + rng.below(300))), er});
  } else if (rng.bernoulli(0.7)) {
    auto near_dx = [&]() {
      return clamp_date(add_days(p.initial_dx_date, static_cast<std::int32_t>(rng.below(91)) - 30),
                        add_days(start, -365), end);
    };
    p.biomarker_tests.push_back(
        {Marker::ER, near_dx(), rng.bernoulli(0.75) ? TestResult::Positive : TestResult::Negative});
    p.biomarker_tests.push_back(
        {Marker::PR, near_dx(), rng.bernoulli(0.60) ? TestResult::Positive : TestResult::Negative});
    double u = rng.next_double();
    p.biomarker_tests.push_back({Marker::HER2, near_dx(),
                                 u < 0.12   ? TestResult::Positive
                                 : u < 0.17 ? TestResult::Equivocal
                                            : TestResult::Negative});
  }

  // Documents. Positives carry indicator tokens only in relevant documents
  // dated at or after mbc - 60 days; recently diagnosed positives therefore
  // have few or no signal-bearing documents.
  const Date signal_from = positive ? add_days(mbc, -60) : Date{};
  std::size_t doc_seq = 0;
  auto push_doc = [&](std::string_view category, Date date, bool force_signal) {
    Document d;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "-%02zu", doc_seq++);
    d.doc_id = "D" + pad6(index) + buf;
    d.category = std::string(category);
    d.date = date;
    d.text = make_text(rng, 30 + rng.below(51));
    bool relevant = is_relevant_category(category);
    if (positive && relevant && !(date < signal_from)) {
      if (rng.bernoulli(cfg.signal_strength)) {
        std::size_t k = (force_signal ? 2 : 1) + rng.below(3);
        for (std::size_t j = 0; j < k; ++j)
          insert_words(rng, d.text, kIndicator[rng.below(kIndicator.size())]);
      }
    } else if (!positive && relevant && rng.bernoulli(cfg.leak_rate)) {
      insert_words(rng, d.text, kConfusable[rng.below(kConfusable.size())]);
    }
    p.documents.push_back(std::move(d));
  };

  std::size_t n_docs = (positive ? 8 : 6) + rng.below(9);
  for (std::size_t k = 0; k < n_docs; ++k)
    push_doc(draw_category(rng), uniform_date(rng, entry, last), false);
  if (positive) {
    static const std::string_view kWorkupCats[3] = {"radiology report", "pathology report",
                                                    "visit note"};
    std::int32_t offsets[3];
    offsets[0] = static_cast<std::int32_t>(1 + rng.below(10));
    offsets[1] = static_cast<std::int32_t>(11 + rng.below(15));
    offsets[2] = static_cast<std::int32_t>(26 + rng.below(20));
    for (int k = 0; k < 3; ++k) {
      Date d = add_days(mbc, offsets[k]);
      if (!(last < d) && !(d < entry)) push_doc(kWorkupCats[k], d, true);
    }
  }

  if (positive) {
    double u = rng.next_double();
    p.line_count = u < 0.52 ? 1 : u < 0.70 ? 2 : u < 0.85 ? 3 : u < 0.95 ? 4 : 5;
  } else {
    p.line_count = rng.bernoulli(0.2) ? 1 : 0;
  }
  return p;
}

}  // namespace

void validate(const GeneratorConfig& config) {
  if (!(config.prevalence > 0.0 && config.prevalence < 1.0))
    throw ConfigError("generator: prevalence must satisfy 0 < prevalence < 1");
  if (!(config.leak_rate >= 0.0 && config.leak_rate < config.signal_strength &&
        config.signal_strength <= 1.0))
    throw ConfigError("generator: required 0 <= leak_rate < signal_strength <= 1");
  if (!(config.start_date < config.end_date))
    throw ConfigError("generator: start_date must be before end_date");
  if (!(config.survival_median_hrpos_years > 0.0))
    throw ConfigError("generator: survival_median_hrpos_years must be positive");
  if (!(config.survival_median_tn_years > 0.0))
    throw ConfigError("generator: survival_median_tn_years must be positive");
  if (!(config.censor_rate >= 0.0 && config.censor_rate <= 1.0))
    throw ConfigError("generator: censor_rate must lie in [0, 1]");
}

const TokenDictionaries& token_dictionaries() {
  static const TokenDictionaries dicts = {kBackground, kIndicator, kConfusable};
  return dicts;
}

std::vector<PatientRecord> generate_corpus(const GeneratorConfig& config) {
  validate(config);
  RngSpec base{config.seed, stream_id("generate")};
  std::vector<PatientRecord> corpus;
  corpus.reserve(config.n_patients);
  for (std::size_t i = 0; i < config.n_patients; ++i)
    corpus.push_back(generate_patient(config, i, base));
  return corpus;
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  if (j.contains("n_patients")) c.n_patients = j.at("n_patients").get<std::size_t>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("prevalence")) c.prevalence = j.at("prevalence").get<double>();
  if (j.contains("signal_strength")) c.signal_strength = j.at("signal_strength").get<double>();
  if (j.contains("leak_rate")) c.leak_rate = j.at("leak_rate").get<double>();
  if (j.contains("date_range")) {
    const auto& r = j.at("date_range");
    if (!r.is_array() || r.size() != 2)
      throw ConfigError("generator: date_range must be [start, end]");
    c.start_date = parse_iso_date(r[0].get<std::string>());
    c.end_date = parse_iso_date(r[1].get<std::string>());
  }
  if (j.contains("survival_median_hrpos_years"))
    c.survival_median_hrpos_years = j.at("survival_median_hrpos_years").get<double>();
  if (j.contains("survival_median_tn_years"))
    c.survival_median_tn_years = j.at("survival_median_tn_years").get<double>();
  if (j.contains("censor_rate")) c.censor_rate = j.at("censor_rate").get<double>();
  return c;
}

nlohmann::ordered_json generator_config_to_json(const GeneratorConfig& c) {
  nlohmann::ordered_json j;
  j["n_patients"] = c.n_patients;
  j["seed"] = c.seed;
  j["prevalence"] = c.prevalence;
  j["signal_strength"] = c.signal_strength;
  j["leak_rate"] = c.leak_rate;
  j["date_range"] = {format_iso_date(c.start_date), format_iso_date(c.end_date)};
  j["survival_median_hrpos_years"] = c.survival_median_hrpos_years;
  j["survival_median_tn_years"] = c.survival_median_tn_years;
  j["censor_rate"] = c.censor_rate;
  return j;
}

}  // namespace macs
