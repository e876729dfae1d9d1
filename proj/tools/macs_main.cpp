#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macs/error.hpp"
#include "macs/pipeline.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
};

macs::PipelineConfig build_config(const CliOptions& opts) {
  macs::PipelineConfig config;
  if (!opts.config_path.empty()) {
    config = macs::load_pipeline_config(opts.config_path);
  } else {
    // Usable out of the box; large enough that every biomarker subgroup
    // supports the bootstrap survival analyses.
    config.generator.n_patients = 8000;
  }
  if (opts.seed_set) config.global_seed = opts.seed;
  if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-assisted cohort selection pipeline with bias analysis"};
  app.require_subcommand(1);

  CliOptions opts;
  const std::vector<std::pair<std::string, std::string>> stages = {
      {"gen", "Generate the synthetic corpus and candidate set"},
      {"train", "Split, build the vocabulary, cross-validate, and fit the model"},
      {"threshold", "Choose the score threshold on validation positives"},
      {"eval", "Score the test set and write the evaluation report"},
      {"bias", "Build the cohorts and write the bias report"},
      {"all", "Run every stage and write the manifest"},
  };
  for (const auto& [name, help] : stages) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "Pipeline config JSON file");
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&opts](const std::uint64_t& v) {
          opts.seed = v;
          opts.seed_set = true;
        },
        "Override global_seed");
    sub->add_option("--out", opts.out_dir, "Override output_dir");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    const macs::PipelineConfig config = build_config(opts);
    if (stage == "gen") {
      macs::run_gen(config);
    } else if (stage == "train") {
      macs::run_train(config);
    } else if (stage == "threshold") {
      macs::run_threshold(config);
    } else if (stage == "eval") {
      macs::run_eval(config);
    } else if (stage == "bias") {
      macs::run_bias(config);
    } else {
      const macs::RunManifest manifest = macs::run_all(config);
      std::cout << manifest.version << ": wrote " << manifest.artifacts.size()
                << " artifacts plus manifest.json to " << config.output_dir << "\n";
    }
  } catch (const macs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
