#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "macs/bias.hpp"
#include "macs/cohort.hpp"
#include "macs/datagen.hpp"
#include "macs/model.hpp"
#include "macs/records.hpp"
#include "macs/select.hpp"
#include "macs/textfeat.hpp"

namespace macs {

inline constexpr std::string_view kVersion = "macs 1.0.0";

struct PipelineConfig {
  GeneratorConfig generator;
  double train_fraction = 0.5;
  double validation_fraction_of_train = 0.2;
  double target_sensitivity = 0.95;
  TrainConfig train;
  std::size_t n_boot = 1000;
  std::string output_dir = "out";
  std::uint64_t global_seed = 0;
};

void validate(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig load_pipeline_config(const std::string& path);

struct Split {
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  std::vector<std::string> test_ids;
};

// Seeded shuffle of the sorted candidate ids: first floor(train_fraction*n)
// form the training pool, the rest the test set; a second shuffle of the pool
// sends its last floor(validation_fraction*m) to validation. Member lists are
// returned sorted.
Split split(const CandidateSet& candidates, double train_fraction,
            double validation_fraction, RngSpec rng);

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct ManifestEntry {
  std::string file;
  std::string sha256;
};

struct RunManifest {
  std::string version;
  nlohmann::ordered_json config;
  std::vector<ManifestEntry> artifacts;
  std::vector<StageTiming> timings;
};

nlohmann::ordered_json manifest_to_json(const RunManifest& manifest);

// Everything the stages pass between each other when run in-process.
struct PipelineState {
  PipelineConfig config;
  std::vector<PatientRecord> corpus;
  CandidateSet candidates;
  Split parts;
  Vocabulary vocab;
  CvResult cv;
  TrainedModel model;
  ThresholdResult threshold;
  std::vector<double> test_scores;
  std::vector<bool> test_labels;
  std::vector<bool> test_flags;
  EvalReport eval;
  CohortPair cohorts;
  std::vector<BiasRow> bias_rows;
  ExampleAnalyses analyses;
};

// Stage bodies; each assumes its predecessors have filled the state.
void stage_generate(PipelineState& state);
void stage_train(PipelineState& state);
void stage_threshold(PipelineState& state);
void stage_eval(PipelineState& state);
void stage_bias(PipelineState& state);

// File-backed subcommands; each loads what it needs from output_dir, runs the
// corresponding stages, and writes its artifacts.
void run_gen(const PipelineConfig& config);
void run_train(const PipelineConfig& config);
void run_threshold(const PipelineConfig& config);
void run_eval(const PipelineConfig& config);
void run_bias(const PipelineConfig& config);
RunManifest run_all(const PipelineConfig& config);

}  // namespace macs
