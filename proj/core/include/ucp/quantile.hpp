#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ucp/label_weights.hpp"
#include "ucp/scores.hpp"

namespace ucp {

inline constexpr double kInfiniteQuantile = std::numeric_limits<double>::infinity();

// Slack allowed when comparing a cumulative mass against the target level.
inline constexpr double kMassTolerance = 1e-12;

struct WeightedSample {
  double value = 0.0;
  double mass = 0.0;
};

// inf{q : sum_i mass_i * 1{value_i <= q} >= beta}. Returns kInfiniteQuantile
// when beta exceeds the total mass.
double weighted_quantile(std::span<const WeightedSample> samples, double beta);

enum class Method { supervised, unsupervised, naive };

std::string_view to_string(Method m) noexcept;
Method method_from_string(std::string_view name);

struct CalibrationResult {
  double q_hat = 0.0;
  double alpha = 0.0;
  Method method = Method::supervised;
  bool infinite = false;  // level exceeded the total mass; q_hat is +inf
  std::optional<SolverReport> solver_report;
};

// Level used by both conformal quantiles: (1 - alpha)(1 + 1/n).
double conformal_level(double alpha, std::size_t n);

// Masses 1/n on the given scores.
CalibrationResult conformal_quantile_supervised(std::span<const double> scores, double alpha);

// Masses w_i(y)/n on all n*c pairs (S(X_i, y), w_i(y)/n).
CalibrationResult conformal_quantile_weighted(const ScoreMatrix& scores, const LabelWeights& weights, double alpha,
                                              Method method = Method::unsupervised);

// Scores at the given labels, one per row.
std::vector<double> scores_at_labels(const ScoreMatrix& scores, std::span<const Label> labels);

using PredictionSet = std::vector<Label>;

// {y : S(x, y) <= q_hat}
PredictionSet prediction_set(std::span<const double> score_row, double q_hat);
std::vector<PredictionSet> prediction_sets(const ScoreMatrix& scores, double q_hat);

struct CoverageMetrics {
  double coverage = 0.0;
  double mean_size = 0.0;
};

CoverageMetrics evaluate(std::span<const PredictionSet> sets, std::span<const Label> true_labels);

}  // namespace ucp
