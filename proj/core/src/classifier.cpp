#include "ucp/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ucp/error.hpp"

namespace ucp {

ProbModel::ProbModel(Matrix weights, int iterations, double objective)
    : weights_(std::move(weights)), iterations_(iterations), objective_(objective) {
  if (weights_.rows() < 2 || weights_.cols() < 2) throw ShapeError("weight matrix must be c x (d+1) with c >= 2, d >= 1");
}

Vector ProbModel::predict_proba(std::span<const double> x) const {
  const auto d = num_features();
  if (static_cast<int>(x.size()) != d)
    throw ShapeError("predict_proba: expected " + std::to_string(d) + " features, got " + std::to_string(x.size()));
  Eigen::Map<const Vector> xv(x.data(), d);
  Vector s = weights_.leftCols(d) * xv + weights_.col(d);
  s.array() -= s.maxCoeff();
  Vector p = s.array().exp();
  p /= p.sum();
  return p.cwiseMax(kProbFloor).cwiseMin(1.0 - kProbFloor);
}

Matrix ProbModel::predict_proba(const Matrix& instances) const {
  const auto d = num_features();
  if (instances.cols() != d) throw ShapeError("predict_proba: feature dimension mismatch");
  Matrix s = instances * weights_.leftCols(d).transpose();
  s.rowwise() += weights_.col(d).transpose();
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return s.cwiseMax(kProbFloor).cwiseMin(1.0 - kProbFloor);
}

Label ProbModel::predict(std::span<const double> x) const {
  const Vector p = predict_proba(x);
  Eigen::Index best = 0;
  for (Eigen::Index y = 1; y < p.size(); ++y)
    if (p(y) > p(best)) best = y;
  return static_cast<Label>(best);
}

double logistic_objective(const Matrix& weights, const Dataset& data, double l2, Matrix* grad) {
  const auto c = data.num_classes();
  const auto d = data.num_features();
  if (weights.rows() != c || weights.cols() != d + 1) throw ShapeError("logistic_objective: weight shape mismatch");
  const auto& x = data.instances();
  const auto y = data.labels();
  const auto n = static_cast<double>(data.size());

  Matrix s = x * weights.leftCols(d).transpose();
  s.rowwise() += weights.col(d).transpose();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    const double mx = row.maxCoeff();
    row.array() -= mx;
    const double lse = std::log(row.array().exp().sum());
    loss += lse - row(y[static_cast<std::size_t>(i)]);
    if (grad) {
      row = (row.array() - lse).exp().matrix();  // softmax
      row(y[static_cast<std::size_t>(i)]) -= 1.0;
    }
  }
  const double reg = 0.5 * l2 * weights.leftCols(d).squaredNorm();
  if (grad) {
    grad->resize(c, d + 1);
    grad->leftCols(d) = s.transpose() * x / n + l2 * weights.leftCols(d);
    grad->col(d) = s.colwise().sum().transpose() / n;
  }
  return loss / n + reg;
}

ProbModel train_logistic(const Dataset& train, const TrainOptions& opts) {
  if (!train.labeled() || train.size() == 0) throw DegenerateTrainingError("training set is empty");
  if (opts.l2 < 0.0) throw ValidationError("l2 must be nonnegative");
  {
    const auto y = train.labels();
    std::set<Label> seen(y.begin(), y.end());
    if (seen.size() < 2) throw DegenerateTrainingError("training data contains a single class");
  }
  const auto c = train.num_classes();
  const auto d = train.num_features();
  Matrix w = Matrix::Zero(c, d + 1);
  Matrix g;
  double f = logistic_objective(w, train, opts.l2, &g);

  double step = 1.0;
  Matrix w_prev, g_prev, w_try, g_try;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const double gnorm2 = g.squaredNorm();
    if (std::sqrt(gnorm2) < opts.tol) break;
    if (it > 0) {
      // Barzilai-Borwein trial step from the last accepted move.
      const double sy = ((w - w_prev).array() * (g - g_prev).array()).sum();
      const double ss = (w - w_prev).squaredNorm();
      if (sy > 0.0) step = std::clamp(ss / sy, 1e-10, 1e10);
    }
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      w_try = w - step * g;
      const double f_try = logistic_objective(w_try, train, opts.l2, &g_try);
      if (f_try <= f - 1e-4 * step * gnorm2) {
        w_prev = std::move(w);
        g_prev = std::move(g);
        w = std::move(w_try);
        g = std::move(g_try);
        f = f_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at machine precision
  }
  return ProbModel(std::move(w), it, f);
}

LossBound loss_bound_from_losses(std::span<const double> losses) {
  if (losses.empty()) throw EmptyInputError("loss bound needs a nonempty validation set");
  const auto k = static_cast<double>(losses.size());
  double mean = 0.0;
  for (double l : losses) mean += l;
  mean /= k;
  double ss = 0.0;
  for (double l : losses) ss += (l - mean) * (l - mean);
  const double sd = losses.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
  LossBound out{mean + sd, mean, sd, false};
  if (!(out.L >= kProbFloor)) {
    out.L = kProbFloor;
    out.floored = true;
  }
  return out;
}

LossBound estimate_loss_bound(const ProbModel& model, const Dataset& validation) {
  if (!validation.labeled() || validation.size() == 0)
    throw EmptyInputError("loss bound needs a nonempty labeled validation set");
  const Matrix p = model.predict_proba(validation.instances());
  const auto y = validation.labels();
  std::vector<double> losses(validation.size());
  for (std::size_t i = 0; i < losses.size(); ++i)
    losses[i] = -std::log(std::max(p(static_cast<Eigen::Index>(i), y[i]), kProbFloor));
  return loss_bound_from_losses(losses);
}

double misclassification_rate(const ProbModel& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  const Matrix p = model.predict_proba(data.instances());
  const auto y = data.labels();
  std::size_t wrong = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < p.cols(); ++k)
      if (p(i, k) > p(i, best)) best = k;
    if (best != y[static_cast<std::size_t>(i)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

}  // namespace ucp
