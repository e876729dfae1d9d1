#include "macs/bias.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "macs/cohort.hpp"
#include "macs/dates.hpp"
#include "macs/error.hpp"

namespace macs {
namespace {

constexpr double kDaysPerYear = 365.25;
const std::string kUnknownLevel = "Results unknown/not assessed";

std::string age_bin(const PatientRecord& p, std::optional<Date> at) {
  if (!p.birth_date || !at) return "Unknown";
  const int age = age_in_years(*p.birth_date, *at);
  if (age < 19) return "Under 19";
  if (age < 35) return "19-34";
  if (age < 50) return "35-50";
  if (age < 65) return "50-64";
  if (age < 75) return "65-74";
  return "75+";
}

std::optional<double> age_value(const PatientRecord& p, std::optional<Date> at) {
  if (!p.birth_date || !at) return std::nullopt;
  return static_cast<double>(age_in_years(*p.birth_date, *at));
}

std::vector<const PatientRecord*> resolve(const std::vector<std::string>& ids,
                                          const std::unordered_map<std::string, const PatientRecord*>& by_id) {
  std::vector<const PatientRecord*> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("bias: cohort id not in corpus: " + id);
    out.push_back(it->second);
  }
  return out;
}

double percent_of_level(const std::vector<int>& levels, int level) {
  std::size_t count = 0;
  for (int v : levels) count += v == level ? 1 : 0;
  return 100.0 * static_cast<double>(count) / static_cast<double>(levels.size());
}

std::optional<double> median_of_present(const std::vector<std::optional<double>>& values) {
  std::vector<double> present;
  present.reserve(values.size());
  for (const auto& v : values) {
    if (v) present.push_back(*v);
  }
  if (present.empty()) return std::nullopt;
  return quantile(std::move(present), 0.5);
}

SurvivalObservation observation_of(const PatientRecord& p) {
  if (!p.mbc_dx_date) throw DataError("bias: survival analysis requires a metastatic date");
  const Date index = *p.mbc_dx_date;
  const Date end = p.death_date ? *p.death_date : p.last_activity_date;
  const std::int32_t days = days_between(index, end);
  if (days < 0) throw DataError("bias: negative survival time for " + p.patient_id);
  return SurvivalObservation{static_cast<double>(days), p.death_date.has_value()};
}

CohortSurvival cohort_survival(const std::vector<SurvivalObservation>& obs,
                               std::size_t n_boot, RngSpec rng) {
  CohortSurvival out;
  out.n = obs.size();
  for (const SurvivalObservation& o : obs) out.events += o.event ? 1 : 0;
  out.curve = km_fit(obs);
  out.median_days = km_median(out.curve);
  out.median_ci = km_median_ci(obs, n_boot, rng);
  return out;
}

SurvivalComparison compare_survival(std::string name,
                                    const std::vector<SurvivalObservation>& ref_obs,
                                    const std::vector<SurvivalObservation>& macs_obs,
                                    std::size_t n_boot, RngSpec base,
                                    std::size_t analysis_index) {
  SurvivalComparison cmp;
  cmp.name = std::move(name);
  cmp.reference = cohort_survival(ref_obs, n_boot, derive(base, 3 * analysis_index + 0));
  cmp.macs = cohort_survival(macs_obs, n_boot, derive(base, 3 * analysis_index + 1));
  const std::function<std::optional<double>(const std::vector<SurvivalObservation>&)>
      median_stat = [](const std::vector<SurvivalObservation>& sample) {
        return km_median(km_fit(sample));
      };
  cmp.median_diff_days =
      bootstrap_diff_ci<SurvivalObservation>(median_stat, ref_obs, macs_obs, n_boot,
                                             derive(base, 3 * analysis_index + 2),
                                             "median survival");
  return cmp;
}

nlohmann::ordered_json survival_to_json(const CohortSurvival& s) {
  nlohmann::ordered_json j;
  j["n"] = s.n;
  j["events"] = s.events;
  j["median_days"] = s.median_days ? nlohmann::ordered_json(*s.median_days)
                                   : nlohmann::ordered_json(nullptr);
  j["median_years"] = s.median_days
                          ? nlohmann::ordered_json(*s.median_days / kDaysPerYear)
                          : nlohmann::ordered_json(nullptr);
  j["median_ci_lo_days"] = s.median_ci.lo ? nlohmann::ordered_json(*s.median_ci.lo)
                                          : nlohmann::ordered_json(nullptr);
  j["median_ci_hi_days"] = s.median_ci.hi ? nlohmann::ordered_json(*s.median_ci.hi)
                                          : nlohmann::ordered_json(nullptr);
  return j;
}

nlohmann::ordered_json comparison_to_json(const SurvivalComparison& cmp) {
  nlohmann::ordered_json j;
  j["reference"] = survival_to_json(cmp.reference);
  j["macs"] = survival_to_json(cmp.macs);
  j["median_diff_days"] = nlohmann::ordered_json{{"point", cmp.median_diff_days.point_diff},
                                                 {"ci_lo", cmp.median_diff_days.lo},
                                                 {"ci_hi", cmp.median_diff_days.hi}};
  return j;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

CohortPair build_cohorts(const std::vector<std::string>& test_ids,
                         const std::vector<bool>& labels, const std::vector<bool>& flags) {
  if (test_ids.size() != labels.size() || test_ids.size() != flags.size()) {
    throw DataError("build_cohorts: misaligned ids, labels, and flags");
  }
  std::unordered_set<std::string> seen;
  CohortPair pair;
  for (std::size_t i = 0; i < test_ids.size(); ++i) {
    if (!seen.insert(test_ids[i]).second) {
      throw DataError("build_cohorts: duplicate patient id " + test_ids[i]);
    }
    if (labels[i]) {
      pair.reference_ids.push_back(test_ids[i]);
      if (flags[i]) pair.macs_ids.push_back(test_ids[i]);
    }
  }
  std::sort(pair.reference_ids.begin(), pair.reference_ids.end());
  std::sort(pair.macs_ids.begin(), pair.macs_ids.end());
  return pair;
}

std::vector<CharacteristicSpec> standard_characteristics() {
  std::vector<CharacteristicSpec> specs;
  const std::vector<std::string> age_bins = {"19-34", "35-50", "50-64",
                                             "65-74", "75+",   "Unknown"};

  auto continuous = [&](std::string name,
                        std::function<std::optional<double>(const PatientRecord&)> f) {
    CharacteristicSpec s;
    s.name = std::move(name);
    s.kind = CharacteristicSpec::Kind::Continuous;
    s.value_of = std::move(f);
    specs.push_back(std::move(s));
  };
  auto categorical = [&](std::string name,
                         std::function<std::string(const PatientRecord&)> f,
                         std::vector<std::string> order) {
    CharacteristicSpec s;
    s.name = std::move(name);
    s.kind = CharacteristicSpec::Kind::Categorical;
    s.category_of = std::move(f);
    s.category_order = std::move(order);
    specs.push_back(std::move(s));
  };

  continuous("Median age at primary breast cancer diagnosis, years",
             [](const PatientRecord& p) { return age_value(p, p.initial_dx_date); });
  categorical("Age at primary breast cancer diagnosis category",
              [](const PatientRecord& p) { return age_bin(p, p.initial_dx_date); },
              age_bins);
  continuous("Median age at mBC diagnosis, years",
             [](const PatientRecord& p) { return age_value(p, p.mbc_dx_date); });
  categorical("Age at mBC diagnosis category",
              [](const PatientRecord& p) { return age_bin(p, p.mbc_dx_date); }, age_bins);
  categorical("Gender",
              [](const PatientRecord& p) { return std::string(to_string(p.gender)); },
              {"Female", "Male"});
  categorical("Race/ethnicity",
              [](const PatientRecord& p) {
                switch (p.race) {
                  case Race::Other: return std::string("Other race");
                  default: return std::string(to_string(p.race));
                }
              },
              {"White", "Black or African American", "Asian", "Other race", "Unknown"});
  categorical("Practice type",
              [](const PatientRecord& p) { return std::string(to_string(p.practice_type)); },
              {"Academic", "Community"});
  categorical("Stage at primary breast cancer diagnosis",
              [](const PatientRecord& p) { return std::string(to_string(p.stage_at_dx)); },
              {"0", "I", "II", "III", "IV", "Not documented"});
  categorical("HR status at mBC diagnosis",
              [](const PatientRecord& p) {
                if (!p.mbc_dx_date) return kUnknownLevel;
                const HrStatus hr = hr_her2_at_mbc(p.biomarker_tests, *p.mbc_dx_date).hr;
                if (hr == HrStatus::Unknown) return kUnknownLevel;
                return std::string(to_string(hr));
              },
              {"Positive", "Negative", kUnknownLevel});
  categorical("HER2 status at mBC diagnosis",
              [](const PatientRecord& p) {
                if (!p.mbc_dx_date) return kUnknownLevel;
                const Her2Status her2 = hr_her2_at_mbc(p.biomarker_tests, *p.mbc_dx_date).her2;
                if (her2 == Her2Status::Unknown) return kUnknownLevel;
                return std::string(to_string(her2));
              },
              {"Positive", "Negative", "Equivocal", kUnknownLevel});
  categorical("BRCA status (germline)",
              [](const PatientRecord& p) {
                switch (p.brca_status) {
                  case BrcaStatus::Other: return std::string("Other result");
                  case BrcaStatus::Unknown: return kUnknownLevel;
                  default: return std::string(to_string(p.brca_status));
                }
              },
              {"Positive", "Negative", "Other result", kUnknownLevel});
  continuous("Median number of visits", [](const PatientRecord& p) {
    return std::optional<double>(static_cast<double>(p.visits.size()));
  });
  continuous("Median number of lines of therapy", [](const PatientRecord& p) {
    return std::optional<double>(static_cast<double>(p.line_count));
  });
  continuous("Median follow-up time from mBC diagnosis, months",
             [](const PatientRecord& p) -> std::optional<double> {
               if (!p.mbc_dx_date) return std::nullopt;
               return followup_months(*p.mbc_dx_date, p.last_activity_date);
             });
  categorical("Year of mBC diagnosis",
              [](const PatientRecord& p) {
                if (!p.mbc_dx_date) return std::string("Unknown");
                return std::to_string(year_of(*p.mbc_dx_date));
              },
              {"2011", "2012", "2013", "2014", "2015", "2016", "2017", "2018"});
  return specs;
}

std::vector<BiasRow> compare_characteristics(const CohortPair& pair,
                                             const std::vector<PatientRecord>& patients,
                                             const std::vector<CharacteristicSpec>& specs,
                                             std::size_t n_boot, RngSpec rng) {
  if (pair.reference_ids.empty() || pair.macs_ids.empty()) {
    throw DataError("bias: empty cohort");
  }
  std::unordered_map<std::string, const PatientRecord*> by_id;
  by_id.reserve(patients.size());
  for (const PatientRecord& p : patients) by_id.emplace(p.patient_id, &p);
  const std::vector<const PatientRecord*> ref = resolve(pair.reference_ids, by_id);
  const std::vector<const PatientRecord*> macs = resolve(pair.macs_ids, by_id);

  std::vector<BiasRow> rows;
  for (std::size_t r = 0; r < specs.size(); ++r) {
    const CharacteristicSpec& spec = specs[r];
    const RngSpec row_spec = derive(rng, r);

    if (spec.kind == CharacteristicSpec::Kind::Continuous) {
      std::vector<std::optional<double>> ref_vals;
      std::vector<std::optional<double>> macs_vals;
      ref_vals.reserve(ref.size());
      macs_vals.reserve(macs.size());
      for (const PatientRecord* p : ref) ref_vals.push_back(spec.value_of(*p));
      for (const PatientRecord* p : macs) macs_vals.push_back(spec.value_of(*p));

      const std::function<std::optional<double>(const std::vector<std::optional<double>>&)>
          stat = median_of_present;
      const DiffCi ci = bootstrap_diff_ci<std::optional<double>>(
          stat, ref_vals, macs_vals, n_boot, derive(row_spec, 0), spec.name);

      auto summarize = [](const std::vector<std::optional<double>>& vals, std::size_t& n_out) {
        std::vector<double> present;
        for (const auto& v : vals) {
          if (v) present.push_back(*v);
        }
        n_out = present.size();
        return describe(present);
      };
      BiasRow row;
      row.characteristic = spec.name;
      row.kind = spec.kind;
      const Summary ref_summary = summarize(ref_vals, row.ref_count);
      const Summary macs_summary = summarize(macs_vals, row.macs_count);
      row.ref_value = ref_summary.median;
      row.ref_iqr_lo = ref_summary.iqr_lo;
      row.ref_iqr_hi = ref_summary.iqr_hi;
      row.macs_value = macs_summary.median;
      row.macs_iqr_lo = macs_summary.iqr_lo;
      row.macs_iqr_hi = macs_summary.iqr_hi;
      row.difference = row.ref_value - row.macs_value;
      row.ci_lo = ci.lo;
      row.ci_hi = ci.hi;
      rows.push_back(std::move(row));
      continue;
    }

    std::vector<std::string> ref_cats;
    std::vector<std::string> macs_cats;
    ref_cats.reserve(ref.size());
    macs_cats.reserve(macs.size());
    for (const PatientRecord* p : ref) ref_cats.push_back(spec.category_of(*p));
    for (const PatientRecord* p : macs) macs_cats.push_back(spec.category_of(*p));

    std::vector<std::string> levels = spec.category_order;
    std::set<std::string> extra;
    for (const std::string& c : ref_cats) extra.insert(c);
    for (const std::string& c : macs_cats) extra.insert(c);
    for (const std::string& level : levels) extra.erase(level);
    levels.insert(levels.end(), extra.begin(), extra.end());

    auto level_index = [&](const std::string& c) {
      return static_cast<int>(std::find(levels.begin(), levels.end(), c) - levels.begin());
    };
    std::vector<int> ref_levels;
    std::vector<int> macs_levels;
    ref_levels.reserve(ref_cats.size());
    macs_levels.reserve(macs_cats.size());
    for (const std::string& c : ref_cats) ref_levels.push_back(level_index(c));
    for (const std::string& c : macs_cats) macs_levels.push_back(level_index(c));

    for (std::size_t li = 0; li < levels.size(); ++li) {
      const int level = static_cast<int>(li);
      const std::function<std::optional<double>(const std::vector<int>&)> stat =
          [level](const std::vector<int>& sample) {
            return std::optional<double>(percent_of_level(sample, level));
          };
      const DiffCi ci = bootstrap_diff_ci<int>(stat, ref_levels, macs_levels, n_boot,
                                               derive(row_spec, li),
                                               spec.name + " / " + levels[li]);

      BiasRow row;
      row.characteristic = spec.name;
      row.kind = spec.kind;
      row.level = levels[li];
      row.ref_count = static_cast<std::size_t>(
          std::count(ref_levels.begin(), ref_levels.end(), level));
      row.macs_count = static_cast<std::size_t>(
          std::count(macs_levels.begin(), macs_levels.end(), level));
      row.ref_value = percent_of_level(ref_levels, level);
      row.macs_value = percent_of_level(macs_levels, level);
      row.difference = row.ref_value - row.macs_value;
      row.ci_lo = ci.lo;
      row.ci_hi = ci.hi;
      row.suppressed = row.ref_count < 5 || row.macs_count < 5;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

ExampleAnalyses run_example_analyses(const CohortPair& pair,
                                     const std::vector<PatientRecord>& patients,
                                     std::size_t n_boot, RngSpec rng) {
  if (pair.reference_ids.empty() || pair.macs_ids.empty()) {
    throw DataError("bias: empty cohort");
  }
  std::unordered_map<std::string, const PatientRecord*> by_id;
  by_id.reserve(patients.size());
  for (const PatientRecord& p : patients) by_id.emplace(p.patient_id, &p);
  const std::vector<const PatientRecord*> ref = resolve(pair.reference_ids, by_id);
  const std::vector<const PatientRecord*> macs = resolve(pair.macs_ids, by_id);

  enum Subgroup { kAll, kHrPos, kTripleNeg, kOther };
  auto subgroup_of = [](const PatientRecord& p) {
    if (!p.mbc_dx_date) return kOther;
    const BiomarkerStatus s = hr_her2_at_mbc(p.biomarker_tests, *p.mbc_dx_date);
    if (s.hr == HrStatus::Positive && s.her2 == Her2Status::Negative) return kHrPos;
    if (s.hr == HrStatus::Negative && s.her2 == Her2Status::Negative) return kTripleNeg;
    return kOther;
  };
  auto observations = [&](const std::vector<const PatientRecord*>& cohort, Subgroup want) {
    std::vector<SurvivalObservation> obs;
    for (const PatientRecord* p : cohort) {
      if (want == kAll || subgroup_of(*p) == want) obs.push_back(observation_of(*p));
    }
    return obs;
  };

  ExampleAnalyses out;
  out.overall = compare_survival("overall", observations(ref, kAll),
                                 observations(macs, kAll), n_boot, rng, 0);
  const std::vector<SurvivalObservation> ref_hr = observations(ref, kHrPos);
  const std::vector<SurvivalObservation> macs_hr = observations(macs, kHrPos);
  const std::vector<SurvivalObservation> ref_tn = observations(ref, kTripleNeg);
  const std::vector<SurvivalObservation> macs_tn = observations(macs, kTripleNeg);
  out.hrpos_her2neg =
      compare_survival("hr_positive_her2_negative", ref_hr, macs_hr, n_boot, rng, 1);
  out.triple_negative =
      compare_survival("triple_negative", ref_tn, macs_tn, n_boot, rng, 2);
  out.logrank_reference = logrank(ref_hr, ref_tn);
  out.logrank_macs = logrank(macs_hr, macs_tn);
  return out;
}

nlohmann::ordered_json bias_rows_to_json(const std::vector<BiasRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const BiasRow& row : rows) {
    nlohmann::ordered_json j;
    j["characteristic"] = row.characteristic;
    const bool continuous = row.kind == CharacteristicSpec::Kind::Continuous;
    j["kind"] = continuous ? "continuous" : "categorical";
    j["level"] = continuous ? nlohmann::ordered_json(nullptr)
                            : nlohmann::ordered_json(row.level);
    auto cell = [&](std::size_t count, double value, double iqr_lo, double iqr_hi) {
      nlohmann::ordered_json c;
      if (row.suppressed) {
        c["count"] = "< 5";
        c[continuous ? "median" : "percent"] = "< 5";
        return c;
      }
      c["count"] = count;
      if (continuous) {
        c["median"] = value;
        c["iqr_lo"] = iqr_lo;
        c["iqr_hi"] = iqr_hi;
      } else {
        c["percent"] = value;
      }
      return c;
    };
    j["reference"] = cell(row.ref_count, row.ref_value, row.ref_iqr_lo, row.ref_iqr_hi);
    j["macs"] = cell(row.macs_count, row.macs_value, row.macs_iqr_lo, row.macs_iqr_hi);
    j["difference"] = row.difference;
    j["ci_lo"] = row.ci_lo;
    j["ci_hi"] = row.ci_hi;
    j["suppressed"] = row.suppressed;
    arr.push_back(std::move(j));
  }
  return arr;
}

nlohmann::ordered_json example_analyses_to_json(const ExampleAnalyses& analyses) {
  nlohmann::ordered_json j;
  j["overall"] = comparison_to_json(analyses.overall);
  j["hr_positive_her2_negative"] = comparison_to_json(analyses.hrpos_her2neg);
  j["triple_negative"] = comparison_to_json(analyses.triple_negative);
  j["logrank_hrpos_vs_triple_negative"] = nlohmann::ordered_json{
      {"reference",
       nlohmann::ordered_json{{"statistic", analyses.logrank_reference.statistic},
                              {"p_value", analyses.logrank_reference.p_value}}},
      {"macs", nlohmann::ordered_json{{"statistic", analyses.logrank_macs.statistic},
                                      {"p_value", analyses.logrank_macs.p_value}}}};
  return j;
}

std::string bias_rows_csv(const std::vector<BiasRow>& rows) {
  std::ostringstream out;
  out << "characteristic,kind,level,ref_count,ref_value,macs_count,macs_value,"
         "difference,ci_lo,ci_hi,suppressed\n";
  for (const BiasRow& row : rows) {
    const bool continuous = row.kind == CharacteristicSpec::Kind::Continuous;
    out << csv_escape(row.characteristic) << ","
        << (continuous ? "continuous" : "categorical") << ","
        << csv_escape(row.level) << ",";
    if (row.suppressed) {
      out << "< 5,< 5,< 5,< 5,";
    } else {
      out << row.ref_count << "," << format_number(row.ref_value) << ","
          << row.macs_count << "," << format_number(row.macs_value) << ",";
    }
    out << format_number(row.difference) << "," << format_number(row.ci_lo) << ","
        << format_number(row.ci_hi) << "," << (row.suppressed ? "true" : "false")
        << "\n";
  }
  return out.str();
}

std::string km_curve_csv(const KMCurve& curve) {
  std::ostringstream out;
  out << "time_days,survival,at_risk,deaths\n";
  out.precision(17);
  for (std::size_t i = 0; i < curve.event_times.size(); ++i) {
    out << curve.event_times[i] << "," << curve.survival[i] << "," << curve.at_risk[i]
        << "," << curve.deaths[i] << "\n";
  }
  return out.str();
}

}  // namespace macs
