#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "macs/textfeat.hpp"

namespace macs {

struct TrainedModel {
  std::vector<double> weights;  // dense, one per vocabulary index
  double intercept = 0.0;
  double reg_lambda = 0.0;
  std::string vocab_fingerprint;
};

std::vector<double> default_lambda_grid();

struct TrainConfig {
  std::vector<double> lambda_grid = default_lambda_grid();
  std::size_t cv_folds = 5;
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-7;  // max-norm of the mean-objective gradient
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

struct Objective {
  double value = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

// J(w,b) = (1/n) sum ln(1+exp(-y_i (w.x_i + b))) + (lambda/2) ||w||^2 with the
// intercept unpenalized, and its exact analytic gradient.
Objective objective_and_gradient(const std::vector<double>& w, double b,
                                 const std::vector<SparseVector>& features,
                                 const std::vector<int>& labels, double reg_lambda);

// Deterministic L-BFGS minimization of J from w=0, b=0 (or the given start).
// The returned model has an empty vocab_fingerprint; callers stamp it.
TrainedModel fit_logreg(const std::vector<SparseVector>& features,
                        const std::vector<int>& labels, double reg_lambda,
                        const TrainConfig& config, std::size_t n_features,
                        const std::vector<double>* init_w = nullptr,
                        double init_b = 0.0);

double predict_score(const TrainedModel& model, const SparseVector& x);
// Same, but first checks the model was trained against this vocabulary.
double predict_score(const TrainedModel& model, const SparseVector& x,
                     const Vocabulary& vocab);

struct CvResult {
  double best_lambda = 0.0;
  std::vector<double> mean_auc;  // parallel to the lambda grid
};

// Seeded stratified k-fold selection of the regularization constant by mean
// held-out AUC, ties resolved toward the larger lambda.
CvResult cross_validate_lambda(const std::vector<SparseVector>& features,
                               const std::vector<int>& labels,
                               const TrainConfig& config, std::size_t n_features);

nlohmann::ordered_json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace macs
