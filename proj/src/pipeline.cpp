#include "macs/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "macs/error.hpp"
#include "macs/sha256.hpp"

namespace macs {
namespace {

constexpr std::size_t kMaxFeatures = 100000;
const Date kActivityDate = make_date(2011, 1, 1);

namespace fs = std::filesystem;

std::string artifact_path(const PipelineConfig& config, const std::string& name) {
  return (fs::path(config.output_dir) / name).string();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing artifact: " + path + " (run the earlier stage first)");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed json in " + path + ": " + e.what());
  }
}

std::string patient_text(const PatientRecord& p) {
  return concat_normalize(select_documents(p));
}

std::unordered_map<std::string, const PatientRecord*> index_corpus(
    const std::vector<PatientRecord>& corpus) {
  std::unordered_map<std::string, const PatientRecord*> by_id;
  by_id.reserve(corpus.size());
  for (const PatientRecord& p : corpus) by_id.emplace(p.patient_id, &p);
  return by_id;
}

const PatientRecord& patient_of(
    const std::unordered_map<std::string, const PatientRecord*>& by_id,
    const std::string& id) {
  auto it = by_id.find(id);
  if (it == by_id.end()) throw DataError("id not in corpus: " + id);
  return *it->second;
}

template <class Fn>
void timed_stage(const std::string& name, std::vector<StageTiming>& timings, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
  const auto stop = std::chrono::steady_clock::now();
  const double ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
          .count();
  timings.push_back({name, ms});
}

template <class Fn>
void tagged(const std::string& name, Fn&& fn) {
  std::vector<StageTiming> sink;
  timed_stage(name, sink, std::forward<Fn>(fn));
}

// Canonical runs force every stage seed to the single global knob.
PipelineConfig canonical(PipelineConfig config) {
  config.generator.seed = config.global_seed;
  config.train.seed = config.global_seed;
  return config;
}

void save_candidates(const PipelineConfig& config, const CandidateSet& candidates) {
  nlohmann::ordered_json j;
  j["activity_date"] = format_iso_date(candidates.activity_date);
  j["cutoff_date"] = format_iso_date(candidates.cutoff_date);
  j["patient_ids"] = candidates.patient_ids;
  write_json_file(artifact_path(config, "candidates.json"), j);
}

CandidateSet load_candidates(const PipelineConfig& config) {
  const nlohmann::json j = read_json_file(artifact_path(config, "candidates.json"));
  CandidateSet out;
  try {
    out.activity_date = parse_iso_date(j.at("activity_date").get<std::string>());
    out.cutoff_date = parse_iso_date(j.at("cutoff_date").get<std::string>());
    out.patient_ids = j.at("patient_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("candidates.json: ") + e.what());
  }
  return out;
}

void save_split(const PipelineConfig& config, const Split& parts) {
  nlohmann::ordered_json j;
  j["train_ids"] = parts.train_ids;
  j["validation_ids"] = parts.validation_ids;
  j["test_ids"] = parts.test_ids;
  write_json_file(artifact_path(config, "split.json"), j);
}

Split load_split(const PipelineConfig& config) {
  const nlohmann::json j = read_json_file(artifact_path(config, "split.json"));
  Split out;
  try {
    out.train_ids = j.at("train_ids").get<std::vector<std::string>>();
    out.validation_ids = j.at("validation_ids").get<std::vector<std::string>>();
    out.test_ids = j.at("test_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("split.json: ") + e.what());
  }
  return out;
}

void save_cv(const PipelineConfig& config, const CvResult& cv) {
  nlohmann::ordered_json j;
  j["lambda_grid"] = config.train.lambda_grid;
  j["mean_auc"] = cv.mean_auc;
  j["best_lambda"] = cv.best_lambda;
  write_json_file(artifact_path(config, "cv.json"), j);
}

void save_threshold(const PipelineConfig& config, const ThresholdResult& t) {
  nlohmann::ordered_json j;
  j["threshold"] = t.threshold;
  j["target_sensitivity"] = t.target_sensitivity;
  j["achieved_validation_sensitivity"] = t.achieved_validation_sensitivity;
  write_json_file(artifact_path(config, "threshold.json"), j);
}

ThresholdResult load_threshold(const PipelineConfig& config) {
  const nlohmann::json j = read_json_file(artifact_path(config, "threshold.json"));
  ThresholdResult out;
  try {
    out.threshold = j.at("threshold").get<double>();
    out.target_sensitivity = j.at("target_sensitivity").get<double>();
    out.achieved_validation_sensitivity =
        j.at("achieved_validation_sensitivity").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("threshold.json: ") + e.what());
  }
  return out;
}

void save_eval(const PipelineConfig& config, const PipelineState& state) {
  const ConfusionCounts cm = confusion(state.test_flags, state.test_labels);
  std::size_t flagged = 0;
  for (bool f : state.test_flags) flagged += f ? 1 : 0;

  nlohmann::ordered_json j = eval_report_to_json(state.eval);
  j["threshold"] = state.threshold.threshold;
  j["n_test"] = state.test_flags.size();
  j["n_flagged"] = flagged;
  j["confusion"] = nlohmann::ordered_json{
      {"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
  j["n_boot"] = config.n_boot;
  write_json_file(artifact_path(config, "eval.json"), j);
  write_text_file(artifact_path(config, "roc.csv"), roc_points_csv(state.eval));
}

void save_bias(const PipelineConfig& config, const PipelineState& state) {
  nlohmann::ordered_json j;
  j["n_boot"] = config.n_boot;
  j["bootstrap_method"] = "independent";
  j["reference_n"] = state.cohorts.reference_ids.size();
  j["macs_n"] = state.cohorts.macs_ids.size();
  j["rows"] = bias_rows_to_json(state.bias_rows);
  j["example_analyses"] = example_analyses_to_json(state.analyses);
  write_json_file(artifact_path(config, "bias_report.json"), j);
  write_text_file(artifact_path(config, "bias_report.csv"), bias_rows_csv(state.bias_rows));

  const auto save_curves = [&](const SurvivalComparison& cmp, const std::string& stem) {
    write_text_file(artifact_path(config, "km_" + stem + "_reference.csv"),
                    km_curve_csv(cmp.reference.curve));
    write_text_file(artifact_path(config, "km_" + stem + "_macs.csv"),
                    km_curve_csv(cmp.macs.curve));
  };
  save_curves(state.analyses.overall, "overall");
  save_curves(state.analyses.hrpos_her2neg, "hrpos_her2neg");
  save_curves(state.analyses.triple_negative, "triple_negative");
}

// Scores the test set once; eval and bias both build on it.
void ensure_test_scores(PipelineState& state) {
  if (state.test_scores.size() == state.parts.test_ids.size() &&
      !state.parts.test_ids.empty()) {
    return;
  }
  if (vocab_fingerprint(state.vocab) != state.model.vocab_fingerprint) {
    throw DataError("model was trained against a different vocabulary");
  }
  const auto by_id = index_corpus(state.corpus);
  state.test_scores.clear();
  state.test_labels.clear();
  state.test_scores.reserve(state.parts.test_ids.size());
  state.test_labels.reserve(state.parts.test_ids.size());
  for (const std::string& id : state.parts.test_ids) {
    const PatientRecord& p = patient_of(by_id, id);
    state.test_scores.push_back(
        predict_score(state.model, vectorize(patient_text(p), state.vocab)));
    state.test_labels.push_back(p.is_positive());
  }
  state.test_flags = classify(state.test_scores, state.threshold.threshold);
}

const std::vector<std::string>& artifact_names() {
  static const std::vector<std::string> names = {
      "corpus.ndjson",
      "candidates.json",
      "split.json",
      "vocabulary.json",
      "cv.json",
      "model.json",
      "threshold.json",
      "eval.json",
      "roc.csv",
      "bias_report.json",
      "bias_report.csv",
      "km_overall_reference.csv",
      "km_overall_macs.csv",
      "km_hrpos_her2neg_reference.csv",
      "km_hrpos_her2neg_macs.csv",
      "km_triple_negative_reference.csv",
      "km_triple_negative_macs.csv",
  };
  return names;
}

}  // namespace

void validate(const PipelineConfig& config) {
  validate(config.generator);
  validate(config.train);
  if (!(config.train_fraction > 0.0) || !(config.train_fraction < 1.0)) {
    throw ConfigError("pipeline: train_fraction must be strictly in (0, 1)");
  }
  if (!(config.validation_fraction_of_train > 0.0) ||
      !(config.validation_fraction_of_train < 1.0)) {
    throw ConfigError("pipeline: validation_fraction_of_train must be strictly in (0, 1)");
  }
  if (!(config.target_sensitivity > 0.0) || !(config.target_sensitivity <= 1.0)) {
    throw ConfigError("pipeline: target_sensitivity must be in (0, 1]");
  }
  if (config.n_boot == 0) throw ConfigError("pipeline: n_boot must be positive");
  if (config.output_dir.empty()) throw ConfigError("pipeline: output_dir must be set");
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    if (j.contains("generator")) c.generator = generator_config_from_json(j.at("generator"));
    if (j.contains("train_fraction")) c.train_fraction = j.at("train_fraction").get<double>();
    if (j.contains("validation_fraction_of_train")) {
      c.validation_fraction_of_train = j.at("validation_fraction_of_train").get<double>();
    }
    if (j.contains("target_sensitivity")) {
      c.target_sensitivity = j.at("target_sensitivity").get<double>();
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      if (t.contains("lambda_grid")) {
        c.train.lambda_grid = t.at("lambda_grid").get<std::vector<double>>();
      }
      if (t.contains("cv_folds")) c.train.cv_folds = t.at("cv_folds").get<std::size_t>();
      if (t.contains("max_iterations")) {
        c.train.max_iterations = t.at("max_iterations").get<std::size_t>();
      }
      if (t.contains("gradient_tolerance")) {
        c.train.gradient_tolerance = t.at("gradient_tolerance").get<double>();
      }
    }
    if (j.contains("n_boot")) c.n_boot = j.at("n_boot").get<std::size_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("global_seed")) c.global_seed = j.at("global_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  return c;
}

nlohmann::ordered_json pipeline_config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["generator"] = generator_config_to_json(c.generator);
  j["train_fraction"] = c.train_fraction;
  j["validation_fraction_of_train"] = c.validation_fraction_of_train;
  j["target_sensitivity"] = c.target_sensitivity;
  j["train"] = nlohmann::ordered_json{{"lambda_grid", c.train.lambda_grid},
                                      {"cv_folds", c.train.cv_folds},
                                      {"max_iterations", c.train.max_iterations},
                                      {"gradient_tolerance", c.train.gradient_tolerance},
                                      {"seed", c.train.seed}};
  j["n_boot"] = c.n_boot;
  j["output_dir"] = c.output_dir;
  j["global_seed"] = c.global_seed;
  return j;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  return pipeline_config_from_json(read_json_file(path));
}

Split split(const CandidateSet& candidates, double train_fraction,
            double validation_fraction, RngSpec rng) {
  if (candidates.patient_ids.empty()) throw DataError("split: empty candidate set");

  std::vector<std::string> ids = candidates.patient_ids;
  std::sort(ids.begin(), ids.end());
  Rng first(derive(rng, 0));
  first.shuffle(ids);

  const std::size_t n = ids.size();
  const std::size_t n_pool =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  std::vector<std::string> pool(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_pool));
  Split out;
  out.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_pool), ids.end());

  std::sort(pool.begin(), pool.end());
  Rng second(derive(rng, 1));
  second.shuffle(pool);
  const std::size_t n_val = static_cast<std::size_t>(
      std::floor(validation_fraction * static_cast<double>(pool.size())));
  const std::size_t n_train = pool.size() - n_val;
  out.train_ids.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation_ids.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());

  if (out.train_ids.empty() || out.validation_ids.empty() || out.test_ids.empty()) {
    throw DataError("split: a partition came out empty; adjust fractions or corpus size");
  }
  std::sort(out.train_ids.begin(), out.train_ids.end());
  std::sort(out.validation_ids.begin(), out.validation_ids.end());
  std::sort(out.test_ids.begin(), out.test_ids.end());
  return out;
}

nlohmann::ordered_json manifest_to_json(const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["version"] = manifest.version;
  j["config"] = manifest.config;
  nlohmann::ordered_json artifacts = nlohmann::ordered_json::array();
  for (const ManifestEntry& e : manifest.artifacts) {
    artifacts.push_back(nlohmann::ordered_json{{"file", e.file}, {"sha256", e.sha256}});
  }
  j["artifacts"] = std::move(artifacts);
  nlohmann::ordered_json timings = nlohmann::ordered_json::array();
  for (const StageTiming& t : manifest.timings) {
    timings.push_back(nlohmann::ordered_json{{"stage", t.stage}, {"ms", t.ms}});
  }
  j["timings_ms"] = std::move(timings);
  return j;
}

void stage_generate(PipelineState& state) {
  state.corpus = generate_corpus(state.config.generator);
  state.candidates =
      select_candidates(state.corpus, kActivityDate, state.config.generator.end_date);
}

void stage_train(PipelineState& state) {
  state.parts = split(state.candidates, state.config.train_fraction,
                      state.config.validation_fraction_of_train,
                      RngSpec{state.config.global_seed, stream_id("split")});

  // Leakage guard: no test patient may contribute to vocabulary statistics.
  std::unordered_set<std::string> test_set(state.parts.test_ids.begin(),
                                           state.parts.test_ids.end());
  std::vector<std::string> pool_ids = state.parts.train_ids;
  pool_ids.insert(pool_ids.end(), state.parts.validation_ids.begin(),
                  state.parts.validation_ids.end());
  std::sort(pool_ids.begin(), pool_ids.end());
  for (const std::string& id : pool_ids) {
    if (test_set.count(id) != 0) {
      throw DataError("leakage guard: test id in vocabulary input: " + id);
    }
  }

  const auto by_id = index_corpus(state.corpus);
  std::vector<std::string> pool_texts;
  pool_texts.reserve(pool_ids.size());
  for (const std::string& id : pool_ids) {
    pool_texts.push_back(patient_text(patient_of(by_id, id)));
  }
  state.vocab = build_vocabulary(pool_texts, kMaxFeatures);

  std::vector<SparseVector> train_x;
  std::vector<int> train_y;
  train_x.reserve(state.parts.train_ids.size());
  train_y.reserve(state.parts.train_ids.size());
  for (const std::string& id : state.parts.train_ids) {
    const PatientRecord& p = patient_of(by_id, id);
    train_x.push_back(vectorize(patient_text(p), state.vocab));
    train_y.push_back(p.is_positive() ? 1 : -1);
  }

  state.cv = cross_validate_lambda(train_x, train_y, state.config.train,
                                   state.vocab.terms.size());
  state.model = fit_logreg(train_x, train_y, state.cv.best_lambda, state.config.train,
                           state.vocab.terms.size());
  state.model.vocab_fingerprint = vocab_fingerprint(state.vocab);
}

void stage_threshold(PipelineState& state) {
  if (vocab_fingerprint(state.vocab) != state.model.vocab_fingerprint) {
    throw DataError("model was trained against a different vocabulary");
  }
  const auto by_id = index_corpus(state.corpus);
  std::vector<double> positive_scores;
  for (const std::string& id : state.parts.validation_ids) {
    const PatientRecord& p = patient_of(by_id, id);
    if (!p.is_positive()) continue;
    positive_scores.push_back(
        predict_score(state.model, vectorize(patient_text(p), state.vocab)));
  }
  state.threshold = choose_threshold(positive_scores, state.config.target_sensitivity);
}

void stage_eval(PipelineState& state) {
  ensure_test_scores(state);
  state.eval = build_eval_report(state.test_scores, state.test_labels,
                                 state.threshold.threshold, state.config.n_boot,
                                 RngSpec{state.config.global_seed, stream_id("bootstrap")});
}

void stage_bias(PipelineState& state) {
  ensure_test_scores(state);
  state.cohorts = build_cohorts(state.parts.test_ids, state.test_labels, state.test_flags);
  state.bias_rows = compare_characteristics(
      state.cohorts, state.corpus, standard_characteristics(), state.config.n_boot,
      RngSpec{state.config.global_seed, stream_id("bias")});
  state.analyses =
      run_example_analyses(state.cohorts, state.corpus, state.config.n_boot,
                           RngSpec{state.config.global_seed, stream_id("os")});
}

void run_gen(const PipelineConfig& raw) {
  const PipelineConfig config = canonical(raw);
  tagged("gen", [&] {
    validate(config);
    fs::create_directories(config.output_dir);
    PipelineState state;
    state.config = config;
    stage_generate(state);
    write_corpus_ndjson(artifact_path(config, "corpus.ndjson"), state.corpus);
    save_candidates(config, state.candidates);
  });
}

void run_train(const PipelineConfig& raw) {
  const PipelineConfig config = canonical(raw);
  tagged("train", [&] {
    validate(config);
    PipelineState state;
    state.config = config;
    state.corpus = read_corpus_ndjson(artifact_path(config, "corpus.ndjson"));
    state.candidates = load_candidates(config);
    stage_train(state);
    save_split(config, state.parts);
    write_json_file(artifact_path(config, "vocabulary.json"),
                    vocabulary_to_json(state.vocab));
    save_cv(config, state.cv);
    write_json_file(artifact_path(config, "model.json"), model_to_json(state.model));
  });
}

namespace {

void load_model_inputs(PipelineState& state) {
  const PipelineConfig& config = state.config;
  state.corpus = read_corpus_ndjson(artifact_path(config, "corpus.ndjson"));
  state.parts = load_split(config);
  state.vocab = vocabulary_from_json(read_json_file(artifact_path(config, "vocabulary.json")));
  state.model = model_from_json(read_json_file(artifact_path(config, "model.json")));
}

}  // namespace

void run_threshold(const PipelineConfig& raw) {
  const PipelineConfig config = canonical(raw);
  tagged("threshold", [&] {
    validate(config);
    PipelineState state;
    state.config = config;
    load_model_inputs(state);
    stage_threshold(state);
    save_threshold(config, state.threshold);
  });
}

void run_eval(const PipelineConfig& raw) {
  const PipelineConfig config = canonical(raw);
  tagged("eval", [&] {
    validate(config);
    PipelineState state;
    state.config = config;
    load_model_inputs(state);
    state.threshold = load_threshold(config);
    stage_eval(state);
    save_eval(config, state);
  });
}

void run_bias(const PipelineConfig& raw) {
  const PipelineConfig config = canonical(raw);
  tagged("bias", [&] {
    validate(config);
    PipelineState state;
    state.config = config;
    load_model_inputs(state);
    state.threshold = load_threshold(config);
    stage_bias(state);
    save_bias(config, state);
  });
}

RunManifest run_all(const PipelineConfig& raw) {
  const PipelineConfig config = canonical(raw);
  RunManifest manifest;
  manifest.version = std::string(kVersion);
  manifest.config = pipeline_config_to_json(config);

  PipelineState state;
  state.config = config;
  timed_stage("gen", manifest.timings, [&] {
    validate(config);
    fs::create_directories(config.output_dir);
    stage_generate(state);
    write_corpus_ndjson(artifact_path(config, "corpus.ndjson"), state.corpus);
    save_candidates(config, state.candidates);
  });
  timed_stage("train", manifest.timings, [&] {
    stage_train(state);
    save_split(config, state.parts);
    write_json_file(artifact_path(config, "vocabulary.json"),
                    vocabulary_to_json(state.vocab));
    save_cv(config, state.cv);
    write_json_file(artifact_path(config, "model.json"), model_to_json(state.model));
  });
  timed_stage("threshold", manifest.timings, [&] {
    stage_threshold(state);
    save_threshold(config, state.threshold);
  });
  timed_stage("eval", manifest.timings, [&] {
    stage_eval(state);
    save_eval(config, state);
  });
  timed_stage("bias", manifest.timings, [&] {
    stage_bias(state);
    save_bias(config, state);
  });

  for (const std::string& name : artifact_names()) {
    manifest.artifacts.push_back({name, sha256_file_hex(artifact_path(config, name))});
  }
  write_json_file(artifact_path(config, "manifest.json"), manifest_to_json(manifest));
  return manifest;
}

}  // namespace macs
