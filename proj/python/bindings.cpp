#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "macs/error.hpp"
#include "macs/pipeline.hpp"
#include "macs/select.hpp"
#include "macs/stats.hpp"
#include "macs/textfeat.hpp"

namespace py = pybind11;

namespace {

std::vector<macs::SurvivalObservation> observations(const std::vector<double>& times,
                                                    const std::vector<bool>& events) {
  if (times.size() != events.size()) {
    throw macs::DataError("times/events length mismatch");
  }
  std::vector<macs::SurvivalObservation> obs(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) obs[i] = {times[i], events[i]};
  return obs;
}

}  // namespace

PYBIND11_MODULE(_macs, m) {
  m.doc() = "Model-assisted cohort selection core";
  m.attr("__version__") = std::string(macs::kVersion);

  py::register_exception<macs::Error>(m, "MacsError");

  m.def("tokenize_ngrams", &macs::tokenize_ngrams, py::arg("text"),
        "Unigrams followed by adjacent bigrams of a normalized text");

  m.def(
      "choose_threshold",
      [](const std::vector<double>& positive_scores, double target) {
        const macs::ThresholdResult r = macs::choose_threshold(positive_scores, target);
        return py::make_tuple(r.threshold, r.achieved_validation_sensitivity);
      },
      py::arg("positive_scores"), py::arg("target") = 0.95,
      "Largest threshold keeping at least the target fraction strictly above it");

  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        return macs::roc_auc(scores, labels).first;
      },
      py::arg("scores"), py::arg("labels"),
      "Mann-Whitney AUC with 0.5 credit for ties");

  m.def(
      "sensitivity",
      [](std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
        return macs::sensitivity(macs::ConfusionCounts{tp, fp, tn, fn});
      },
      py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));

  m.def(
      "specificity",
      [](std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
        return macs::specificity(macs::ConfusionCounts{tp, fp, tn, fn});
      },
      py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));

  m.def("efficiency_gain", &macs::efficiency_gain, py::arg("total_evaluated"),
        py::arg("flagged_positive"),
        "Fraction of the evaluated population excluded from manual review");

  m.def(
      "km_median",
      [](const std::vector<double>& times, const std::vector<bool>& events) {
        return macs::km_median(macs::km_fit(observations(times, events)));
      },
      py::arg("times"), py::arg("events"),
      "Kaplan-Meier median survival time, or None when not reached");

  m.def(
      "logrank",
      [](const std::vector<double>& times_a, const std::vector<bool>& events_a,
         const std::vector<double>& times_b, const std::vector<bool>& events_b) {
        const macs::LogrankResult r = macs::logrank(observations(times_a, events_a),
                                                    observations(times_b, events_b));
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("times_a"), py::arg("events_a"), py::arg("times_b"), py::arg("events_b"),
      "Two-group log-rank test; returns (statistic, p_value)");

  m.def("chi2_sf", &macs::chi2_sf, py::arg("x"), py::arg("df") = 1,
        "Chi-square survival function (1 df)");

  m.def("quantile", &macs::quantile, py::arg("values"), py::arg("q"),
        "Linear-interpolation quantile of the values");

  m.def(
      "run_all",
      [](const std::string& config_json) {
        const macs::PipelineConfig config =
            macs::pipeline_config_from_json(nlohmann::json::parse(config_json));
        const macs::RunManifest manifest = macs::run_all(config);
        return macs::manifest_to_json(manifest).dump();
      },
      py::arg("config_json"),
      "Run the full pipeline from a config JSON string; returns the manifest as JSON");
}
