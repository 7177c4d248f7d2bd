#include "ucp/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ucp/error.hpp"

namespace ucp {

LabelWeights::LabelWeights(std::size_t n, int c)
    : n_(n), c_(c), w_(Vector::Zero(static_cast<Eigen::Index>(n * static_cast<std::size_t>(c)))) {
  if (c < 1) throw ValidationError("label weights need at least one class");
}

LabelWeights::LabelWeights(Vector flat, int c) : c_(c), w_(std::move(flat)) {
  if (c < 1) throw ValidationError("label weights need at least one class");
  if (w_.size() % c != 0) throw ShapeError("flat weight length is not a multiple of the class count");
  n_ = static_cast<std::size_t>(w_.size() / c);
}

void LabelWeights::validate(double tol) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double sum = 0.0;
    for (Label y = 0; y < c_; ++y) {
      const double v = (*this)(i, y);
      if (!(v >= -tol && v <= 1.0 + tol))
        throw ValidationError("weight w_" + std::to_string(i + 1) + "(" + std::to_string(y + 1) + ") outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
      throw ValidationError("weights of instance " + std::to_string(i + 1) + " sum to " + std::to_string(sum));
  }
}

double weighted_quantile(std::span<const WeightedSample> samples, double beta) {
  if (!(beta > 0.0)) throw ValidationError("quantile level must be positive");
  std::vector<WeightedSample> sorted;
  sorted.reserve(samples.size());
  double total = 0.0;
  for (const auto& s : samples) {
    if (!(s.mass >= 0.0)) throw ValidationError("negative mass in weighted quantile");
    if (s.mass == 0.0) continue;  // never the infimum
    sorted.push_back(s);
    total += s.mass;
  }
  if (beta > total + kMassTolerance) return kInfiniteQuantile;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const WeightedSample& a, const WeightedSample& b) { return a.value < b.value; });
  double cumulative = 0.0;
  for (std::size_t k = 0; k < sorted.size();) {
    const double value = sorted[k].value;
    // Equal values merge into one atom.
    for (; k < sorted.size() && sorted[k].value == value; ++k) cumulative += sorted[k].mass;
    if (cumulative >= beta - kMassTolerance) return value;
  }
  return kInfiniteQuantile;
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::supervised: return "supervised";
    case Method::unsupervised: return "unsupervised";
    case Method::naive: return "naive";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  if (name == "supervised") return Method::supervised;
  if (name == "unsupervised") return Method::unsupervised;
  if (name == "naive") return Method::naive;
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

double conformal_level(double alpha, std::size_t n) {
  return (1.0 - alpha) * (1.0 + 1.0 / static_cast<double>(n));
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
}

CalibrationResult make_result(double q, double alpha, Method method) {
  CalibrationResult r;
  r.q_hat = q;
  r.alpha = alpha;
  r.method = method;
  r.infinite = std::isinf(q);
  return r;
}

}  // namespace

CalibrationResult conformal_quantile_supervised(std::span<const double> scores, double alpha) {
  check_alpha(alpha);
  if (scores.empty()) throw EmptyInputError("conformal quantile needs at least one calibration score");
  const double mass = 1.0 / static_cast<double>(scores.size());
  std::vector<WeightedSample> samples(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) samples[i] = {scores[i], mass};
  return make_result(weighted_quantile(samples, conformal_level(alpha, scores.size())), alpha, Method::supervised);
}

CalibrationResult conformal_quantile_weighted(const ScoreMatrix& scores, const LabelWeights& weights, double alpha,
                                              Method method) {
  check_alpha(alpha);
  const std::size_t n = scores.rows();
  const int c = scores.num_classes();
  if (weights.num_instances() != n || weights.num_classes() != c)
    throw ShapeError("weights are " + std::to_string(weights.num_instances()) + "x" +
                     std::to_string(weights.num_classes()) + " but scores are " + std::to_string(n) + "x" +
                     std::to_string(c));
  if (n == 0) throw EmptyInputError("conformal quantile needs at least one calibration instance");
  const double nd = static_cast<double>(n);
  std::vector<WeightedSample> samples;
  samples.reserve(n * static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < n; ++i)
    for (Label y = 0; y < c; ++y)
      samples.push_back({scores.values(static_cast<Eigen::Index>(i), y), weights(i, y) / nd});
  return make_result(weighted_quantile(samples, conformal_level(alpha, n)), alpha, method);
}

std::vector<double> scores_at_labels(const ScoreMatrix& scores, std::span<const Label> labels) {
  if (labels.size() != scores.rows()) throw ShapeError("label count does not match score rows");
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= scores.num_classes()) throw RangeError("label out of range");
    out[i] = scores.values(static_cast<Eigen::Index>(i), labels[i]);
  }
  return out;
}

PredictionSet prediction_set(std::span<const double> score_row, double q_hat) {
  PredictionSet set;
  for (std::size_t y = 0; y < score_row.size(); ++y)
    if (score_row[y] <= q_hat) set.push_back(static_cast<Label>(y));
  return set;
}

std::vector<PredictionSet> prediction_sets(const ScoreMatrix& scores, double q_hat) {
  std::vector<PredictionSet> out(scores.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = prediction_set(scores.row(i), q_hat);
  return out;
}

CoverageMetrics evaluate(std::span<const PredictionSet> sets, std::span<const Label> true_labels) {
  if (sets.size() != true_labels.size())
    throw ShapeError("evaluate: " + std::to_string(sets.size()) + " sets but " + std::to_string(true_labels.size()) +
                     " labels");
  if (sets.empty()) return {};
  std::size_t covered = 0;
  std::size_t total_size = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    total_size += sets[i].size();
    if (std::find(sets[i].begin(), sets[i].end(), true_labels[i]) != sets[i].end()) ++covered;
  }
  const auto k = static_cast<double>(sets.size());
  return {static_cast<double>(covered) / k, static_cast<double>(total_size) / k};
}

}  // namespace ucp
