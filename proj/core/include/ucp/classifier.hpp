#pragma once

#include <span>
#include <vector>

#include "ucp/data.hpp"
#include "ucp/types.hpp"

namespace ucp {

inline constexpr double kProbFloor = 1e-12;

struct TrainOptions {
  double l2 = 1e-3;
  int max_iters = 2000;
  double tol = 1e-6;  // gradient norm
};

// Multinomial logistic regression. Weight matrix is c x (d+1); the last
// column is the intercept.
class ProbModel {
 public:
  ProbModel() = default;
  explicit ProbModel(Matrix weights, int iterations = 0, double objective = 0.0);

  int num_classes() const noexcept { return static_cast<int>(weights_.rows()); }
  int num_features() const noexcept { return static_cast<int>(weights_.cols()) - 1; }
  const Matrix& weights() const noexcept { return weights_; }
  int iterations() const noexcept { return iterations_; }
  double objective() const noexcept { return objective_; }

  // Softmax of the affine scores, clamped to [kProbFloor, 1 - kProbFloor].
  Vector predict_proba(std::span<const double> x) const;
  // Row i holds predict_proba of instance i.
  Matrix predict_proba(const Matrix& instances) const;
  // argmax of predict_proba; ties go to the smallest label.
  Label predict(std::span<const double> x) const;

 private:
  Matrix weights_;
  int iterations_ = 0;
  double objective_ = 0.0;
};

// Mean cross-entropy plus (l2/2)*||W without intercept||^2. Writes the gradient
// when `grad` is non-null.
double logistic_objective(const Matrix& weights, const Dataset& data, double l2, Matrix* grad = nullptr);

// Gradient descent with Barzilai-Borwein trial steps and Armijo backtracking;
// every accepted step strictly lowers the objective.
ProbModel train_logistic(const Dataset& train, const TrainOptions& opts = {});

struct LossBound {
  double L = 0.0;  // nats per sample
  double mean = 0.0;
  double stddev = 0.0;
  bool floored = false;  // mean + stddev fell below kProbFloor
};

// L = mean + one sample standard deviation of the given per-sample losses.
LossBound loss_bound_from_losses(std::span<const double> losses);

// Per-sample loss is -log p(Y|X) on the held-out validation set.
LossBound estimate_loss_bound(const ProbModel& model, const Dataset& validation);

double misclassification_rate(const ProbModel& model, const Dataset& data);

}  // namespace ucp
