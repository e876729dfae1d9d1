#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "macs/dates.hpp"
#include "macs/records.hpp"

namespace macs {

struct GeneratorConfig {
  std::size_t n_patients = 0;
  std::uint64_t seed = 0;
  double prevalence = 0.0859;
  double signal_strength = 0.85;
  double leak_rate = 0.05;
  Date start_date = make_date(2009, 1, 1);
  Date end_date = make_date(2018, 2, 1);
  double survival_median_hrpos_years = 3.03;
  double survival_median_tn_years = 1.16;
  double censor_rate = 0.40;
};

// Throws ConfigError naming the first violated constraint.
void validate(const GeneratorConfig& config);

struct TokenDictionaries {
  std::vector<std::string_view> background;
  std::vector<std::string_view> indicator;
  std::vector<std::string_view> confusable;
};

// Fixed word lists. Entries are pairwise disjoint across the three lists;
// confusable entries are multi-word fragments that embed an indicator word
// in a negating context.
const TokenDictionaries& token_dictionaries();

std::vector<PatientRecord> generate_corpus(const GeneratorConfig& config);

GeneratorConfig generator_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json generator_config_to_json(const GeneratorConfig& config);

}  // namespace macs
