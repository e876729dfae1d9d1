#include "macs/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "macs/error.hpp"
#include "macs/rng.hpp"
#include "macs/select.hpp"

namespace macs {
namespace {

// ln(1 + exp(-m)) without overflow for large |m|.
double softplus_neg(double m) {
  if (m >= 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_training_input(const std::vector<SparseVector>& features,
                          const std::vector<int>& labels, std::size_t n_features) {
  if (features.size() != labels.size()) {
    throw DataError("fit: features/labels length mismatch");
  }
  if (features.size() < 2) throw DataError("fit: need at least two rows");
  bool has_pos = false;
  bool has_neg = false;
  for (int y : labels) {
    if (y == 1) {
      has_pos = true;
    } else if (y == -1) {
      has_neg = true;
    } else {
      throw DataError("fit: labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) throw TrainError("fit: single-class input");
  for (const SparseVector& x : features) {
    for (const SparseEntry& e : x.entries) {
      if (e.index >= n_features) throw DataError("fit: feature index out of range");
    }
  }
}

// Mean log-loss and gradient computed from the cached linear scores z_i.
double loss_from_scores(const std::vector<double>& z, const std::vector<int>& labels) {
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    sum += softplus_neg(static_cast<double>(labels[i]) * z[i]);
  }
  return sum / static_cast<double>(z.size());
}

struct LbfgsMemory {
  std::vector<std::vector<double>> s;
  std::vector<std::vector<double>> y;
  std::vector<double> rho;
  std::size_t capacity = 5;

  void push(std::vector<double> s_k, std::vector<double> y_k) {
    double sy = 0.0;
    double ss = 0.0;
    double yy = 0.0;
    for (std::size_t i = 0; i < s_k.size(); ++i) {
      sy += s_k[i] * y_k[i];
      ss += s_k[i] * s_k[i];
      yy += y_k[i] * y_k[i];
    }
    if (!(sy > 1e-12 * std::sqrt(ss) * std::sqrt(yy))) return;
    if (s.size() == capacity) {
      s.erase(s.begin());
      y.erase(y.begin());
      rho.erase(rho.begin());
    }
    s.push_back(std::move(s_k));
    y.push_back(std::move(y_k));
    rho.push_back(1.0 / sy);
  }

  void clear() {
    s.clear();
    y.clear();
    rho.clear();
  }

  // Two-loop recursion; g is the current gradient, result the descent step.
  std::vector<double> direction(const std::vector<double>& g) const {
    std::vector<double> q = g;
    const std::size_t m = s.size();
    std::vector<double> alpha(m);
    for (std::size_t k = m; k-- > 0;) {
      double sq = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) sq += s[k][i] * q[i];
      alpha[k] = rho[k] * sq;
      for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * y[k][i];
    }
    if (m > 0) {
      double sy = 0.0;
      double yy = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        sy += s[m - 1][i] * y[m - 1][i];
        yy += y[m - 1][i] * y[m - 1][i];
      }
      const double gamma = sy / yy;
      for (double& v : q) v *= gamma;
    }
    for (std::size_t k = 0; k < m; ++k) {
      double yq = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) yq += y[k][i] * q[i];
      const double beta = rho[k] * yq;
      for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * s[k][i];
    }
    for (double& v : q) v = -v;
    return q;
  }
};

}  // namespace

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  grid.reserve(9);
  for (int k = 0; k < 9; ++k) grid.push_back(std::pow(10.0, -2.0 + 0.5 * k));
  return grid;
}

void validate(const TrainConfig& config) {
  if (config.lambda_grid.empty()) throw ConfigError("train config: empty lambda grid");
  for (std::size_t i = 0; i < config.lambda_grid.size(); ++i) {
    if (!(config.lambda_grid[i] > 0.0)) {
      throw ConfigError("train config: lambda grid values must be positive");
    }
    if (i > 0 && !(config.lambda_grid[i] > config.lambda_grid[i - 1])) {
      throw ConfigError("train config: lambda grid must be strictly increasing");
    }
  }
  if (config.cv_folds < 2) throw ConfigError("train config: cv_folds must be at least 2");
  if (config.max_iterations == 0) {
    throw ConfigError("train config: max_iterations must be positive");
  }
  if (!(config.gradient_tolerance > 0.0)) {
    throw ConfigError("train config: gradient_tolerance must be positive");
  }
}

Objective objective_and_gradient(const std::vector<double>& w, double b,
                                 const std::vector<SparseVector>& features,
                                 const std::vector<int>& labels, double reg_lambda) {
  if (features.size() != labels.size()) {
    throw DataError("objective: features/labels length mismatch");
  }
  if (features.empty()) throw DataError("objective: empty input");

  const double n = static_cast<double>(features.size());
  Objective out;
  out.grad_w.assign(w.size(), 0.0);

  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double z = b;
    for (const SparseEntry& e : features[i].entries) {
      if (e.index >= w.size()) throw DataError("objective: feature index out of range");
      z += w[e.index] * e.value;
    }
    const double y = static_cast<double>(labels[i]);
    const double m = y * z;
    loss += softplus_neg(m);
    const double coef = -y * sigmoid(-m) / n;
    for (const SparseEntry& e : features[i].entries) {
      out.grad_w[e.index] += coef * e.value;
    }
    out.grad_b += coef;
  }

  double w_sq = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w_sq += w[j] * w[j];
    out.grad_w[j] += reg_lambda * w[j];
  }
  out.value = loss / n + 0.5 * reg_lambda * w_sq;
  return out;
}

TrainedModel fit_logreg(const std::vector<SparseVector>& features,
                        const std::vector<int>& labels, double reg_lambda,
                        const TrainConfig& config, std::size_t n_features,
                        const std::vector<double>* init_w, double init_b) {
  validate(config);
  if (!(reg_lambda > 0.0)) throw ConfigError("fit: reg_lambda must be positive");
  check_training_input(features, labels, n_features);
  if (init_w != nullptr && init_w->size() != n_features) {
    throw DataError("fit: init size mismatch");
  }

  const std::size_t n = features.size();
  const std::size_t dim = n_features + 1;  // trailing slot is the intercept

  std::vector<double> theta(dim, 0.0);
  if (init_w != nullptr) std::copy(init_w->begin(), init_w->end(), theta.begin());
  theta[n_features] = init_b;

  std::vector<double> z(n, 0.0);
  auto recompute_scores = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      double zi = theta[n_features];
      for (const SparseEntry& e : features[i].entries) zi += theta[e.index] * e.value;
      z[i] = zi;
    }
  };
  recompute_scores();

  // Gradient of the full objective at theta, using the cached scores.
  std::vector<double> grad(dim);
  auto compute_gradient = [&]() {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = static_cast<double>(labels[i]);
      const double coef = -y * sigmoid(-y * z[i]) * inv_n;
      for (const SparseEntry& e : features[i].entries) grad[e.index] += coef * e.value;
      grad[n_features] += coef;
    }
    for (std::size_t j = 0; j < n_features; ++j) grad[j] += reg_lambda * theta[j];
  };

  auto objective_value = [&](const std::vector<double>& scores) {
    double w_sq = 0.0;
    for (std::size_t j = 0; j < n_features; ++j) w_sq += theta[j] * theta[j];
    return loss_from_scores(scores, labels) + 0.5 * reg_lambda * w_sq;
  };

  double current = objective_value(z);
  compute_gradient();

  LbfgsMemory memory;
  std::vector<double> dz(n);
  std::vector<double> trial_z(n);
  std::vector<double> prev_theta(dim);
  std::vector<double> prev_grad(dim);

  const double c1 = 1e-4;
  double grad_inf = 0.0;
  for (double g : grad) grad_inf = std::max(grad_inf, std::fabs(g));

  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    if (grad_inf <= config.gradient_tolerance) break;

    std::vector<double> dir = memory.direction(grad);
    double gd = 0.0;
    for (std::size_t j = 0; j < dim; ++j) gd += grad[j] * dir[j];
    if (!(gd < 0.0)) {
      memory.clear();
      for (std::size_t j = 0; j < dim; ++j) dir[j] = -grad[j];
      gd = 0.0;
      for (std::size_t j = 0; j < dim; ++j) gd += grad[j] * dir[j];
    }

    for (std::size_t i = 0; i < n; ++i) {
      double d = dir[n_features];
      for (const SparseEntry& e : features[i].entries) d += dir[e.index] * e.value;
      dz[i] = d;
    }

    double step = 1.0;
    if (memory.s.empty()) {
      double g2 = 0.0;
      for (double g : grad) g2 += g * g;
      step = 1.0 / std::max(1.0, std::sqrt(g2));
    }

    prev_theta = theta;
    prev_grad = grad;
    const double base = current;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t j = 0; j < dim; ++j) theta[j] = prev_theta[j] + step * dir[j];
      for (std::size_t i = 0; i < n; ++i) trial_z[i] = z[i] + step * dz[i];
      const double trial = objective_value(trial_z);
      if (trial <= base + c1 * step * gd) {
        current = trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "fit: line search failed; gradient max-norm " << grad_inf;
      throw TrainError(msg.str());
    }

    std::swap(z, trial_z);
    compute_gradient();
    grad_inf = 0.0;
    for (double g : grad) grad_inf = std::max(grad_inf, std::fabs(g));

    std::vector<double> s_k(dim);
    std::vector<double> y_k(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      s_k[j] = theta[j] - prev_theta[j];
      y_k[j] = grad[j] - prev_grad[j];
    }
    memory.push(std::move(s_k), std::move(y_k));
  }

  if (grad_inf > config.gradient_tolerance) {
    std::ostringstream msg;
    msg << "fit: no convergence in " << config.max_iterations
        << " iterations; gradient max-norm " << grad_inf;
    throw TrainError(msg.str());
  }

  TrainedModel model;
  model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(n_features));
  model.intercept = theta[n_features];
  model.reg_lambda = reg_lambda;
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw TrainError("fit: non-finite weight");
  }
  if (!std::isfinite(model.intercept)) throw TrainError("fit: non-finite intercept");
  return model;
}

double predict_score(const TrainedModel& model, const SparseVector& x) {
  double z = model.intercept;
  for (const SparseEntry& e : x.entries) {
    if (e.index >= model.weights.size()) {
      throw DataError("predict: feature index out of range");
    }
    z += model.weights[e.index] * e.value;
  }
  return sigmoid(z);
}

double predict_score(const TrainedModel& model, const SparseVector& x,
                     const Vocabulary& vocab) {
  if (vocab_fingerprint(vocab) != model.vocab_fingerprint) {
    throw DataError("predict: vocabulary fingerprint mismatch");
  }
  return predict_score(model, x);
}

CvResult cross_validate_lambda(const std::vector<SparseVector>& features,
                               const std::vector<int>& labels,
                               const TrainConfig& config, std::size_t n_features) {
  validate(config);
  check_training_input(features, labels, n_features);

  std::vector<std::size_t> pos_idx;
  std::vector<std::size_t> neg_idx;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? pos_idx : neg_idx).push_back(i);
  }
  const std::size_t folds = config.cv_folds;
  if (std::min(pos_idx.size(), neg_idx.size()) < folds) {
    throw TrainError("cv: minority class smaller than fold count");
  }

  const RngSpec cv_spec{config.seed, stream_id("cv")};
  Rng r_pos(derive(cv_spec, 0));
  r_pos.shuffle(pos_idx);
  Rng r_neg(derive(cv_spec, 1));
  r_neg.shuffle(neg_idx);

  std::vector<std::size_t> fold_of(labels.size());
  for (std::size_t k = 0; k < pos_idx.size(); ++k) fold_of[pos_idx[k]] = k % folds;
  for (std::size_t k = 0; k < neg_idx.size(); ++k) fold_of[neg_idx[k]] = k % folds;

  CvResult result;
  result.mean_auc.assign(config.lambda_grid.size(), 0.0);

  for (std::size_t li = 0; li < config.lambda_grid.size(); ++li) {
    const double lambda = config.lambda_grid[li];
    double auc_sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<SparseVector> train_x;
      std::vector<int> train_y;
      std::vector<SparseVector> held_x;
      std::vector<bool> held_y;
      for (std::size_t i = 0; i < features.size(); ++i) {
        if (fold_of[i] == f) {
          held_x.push_back(features[i]);
          held_y.push_back(labels[i] == 1);
        } else {
          train_x.push_back(features[i]);
          train_y.push_back(labels[i]);
        }
      }
      const TrainedModel fold_model =
          fit_logreg(train_x, train_y, lambda, config, n_features);
      std::vector<double> scores(held_x.size());
      for (std::size_t i = 0; i < held_x.size(); ++i) {
        scores[i] = predict_score(fold_model, held_x[i]);
      }
      auc_sum += roc_auc(scores, held_y).first;
    }
    result.mean_auc[li] = auc_sum / static_cast<double>(folds);
  }

  std::size_t best = 0;
  for (std::size_t li = 1; li < result.mean_auc.size(); ++li) {
    if (result.mean_auc[li] >= result.mean_auc[best]) best = li;
  }
  result.best_lambda = config.lambda_grid[best];
  return result;
}

nlohmann::ordered_json model_to_json(const TrainedModel& model) {
  nlohmann::ordered_json weights = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    if (model.weights[i] != 0.0) {
      weights.push_back(nlohmann::ordered_json::array({i, model.weights[i]}));
    }
  }
  nlohmann::ordered_json j;
  j["n_features"] = model.weights.size();
  j["weights"] = std::move(weights);
  j["intercept"] = model.intercept;
  j["reg_lambda"] = model.reg_lambda;
  j["vocab_fingerprint"] = model.vocab_fingerprint;
  return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
  TrainedModel model;
  try {
    model.weights.assign(j.at("n_features").get<std::size_t>(), 0.0);
    for (const auto& pair : j.at("weights")) {
      const std::size_t idx = pair.at(0).get<std::size_t>();
      if (idx >= model.weights.size()) throw DataError("model json: index out of range");
      model.weights[idx] = pair.at(1).get<double>();
    }
    model.intercept = j.at("intercept").get<double>();
    model.reg_lambda = j.at("reg_lambda").get<double>();
    model.vocab_fingerprint = j.at("vocab_fingerprint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
  return model;
}

}  // namespace macs
