#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "ucp/classifier.hpp"
#include "ucp/types.hpp"

namespace ucp {

enum class ScoreKind { adaptive, probability };

std::string_view to_string(ScoreKind kind) noexcept;
ScoreKind score_kind_from_string(std::string_view name);

// Scores lie in [0, 1]; this is the absolute width of the tie-breaking noise.
inline constexpr double kDefaultTieNoise = 1e-9;

// Adaptive score: mass of labels strictly more probable than y, plus u * p(y).
double aps_score(std::span<const double> probs, Label y, double u);

// 1 - p(y).
double prob_score(std::span<const double> probs, Label y);

// S(X_i, y) for every instance i and label y.
struct ScoreMatrix {
  Matrix values;  // n x c
  double noise_epsilon = 0.0;
  ScoreKind kind = ScoreKind::adaptive;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  int num_classes() const noexcept { return static_cast<int>(values.cols()); }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values.data() + i * static_cast<std::size_t>(values.cols()), static_cast<std::size_t>(values.cols())};
  }
};

// One u ~ Unif(0,1) per (i, y) cell for the adaptive kind, then additive
// noise ~ Unif[0, noise_epsilon] per cell. Deterministic given the seed.
// With noise_epsilon > 0 all entries are checked to be pairwise distinct.
ScoreMatrix build_score_matrix(const ProbModel& model, const Matrix& instances, ScoreKind kind, std::uint64_t seed,
                               double noise_epsilon = kDefaultTieNoise);

// Same, from precomputed probability rows.
ScoreMatrix build_score_matrix(const Matrix& probs, ScoreKind kind, std::uint64_t seed,
                               double noise_epsilon = kDefaultTieNoise);

bool all_distinct(const ScoreMatrix& scores);

}  // namespace ucp
