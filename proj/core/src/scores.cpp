#include "ucp/scores.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ucp/error.hpp"
#include "ucp/rng.hpp"

namespace ucp {

std::string_view to_string(ScoreKind kind) noexcept {
  return kind == ScoreKind::adaptive ? "adaptive" : "probability";
}

ScoreKind score_kind_from_string(std::string_view name) {
  if (name == "adaptive" || name == "aps") return ScoreKind::adaptive;
  if (name == "probability" || name == "prob") return ScoreKind::probability;
  throw ValidationError("unknown score kind '" + std::string(name) + "'");
}

namespace {

void check_label(std::span<const double> probs, Label y) {
  if (y < 0 || static_cast<std::size_t>(y) >= probs.size())
    throw RangeError("label " + std::to_string(y + 1) + " outside 1.." + std::to_string(probs.size()));
}

}  // namespace

double aps_score(std::span<const double> probs, Label y, double u) {
  check_label(probs, y);
  if (!(u >= 0.0 && u <= 1.0)) throw RangeError("aps_score: u must lie in [0, 1]");
  const double py = probs[static_cast<std::size_t>(y)];
  double above = 0.0;
  for (double p : probs)
    if (p > py) above += p;
  return above + u * py;
}

double prob_score(std::span<const double> probs, Label y) {
  check_label(probs, y);
  return 1.0 - probs[static_cast<std::size_t>(y)];
}

ScoreMatrix build_score_matrix(const Matrix& probs, ScoreKind kind, std::uint64_t seed, double noise_epsilon) {
  if (!(noise_epsilon >= 0.0)) throw ValidationError("noise_epsilon must be nonnegative");
  const auto n = probs.rows();
  const auto c = probs.cols();
  ScoreMatrix out;
  out.values.resize(n, c);
  out.noise_epsilon = noise_epsilon;
  out.kind = kind;

  Rng u_rng(derive_seed(seed, {1}));
  Rng noise_rng(derive_seed(seed, {2}));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::span<const double> row(probs.data() + i * c, static_cast<std::size_t>(c));
    for (Eigen::Index y = 0; y < c; ++y) {
      double s = 0.0;
      if (kind == ScoreKind::adaptive)
        s = aps_score(row, static_cast<Label>(y), uniform01(u_rng));
      else
        s = prob_score(row, static_cast<Label>(y));
      if (noise_epsilon > 0.0) s += noise_epsilon * uniform01(noise_rng);
      out.values(i, y) = s;
    }
  }
  if (noise_epsilon > 0.0 && !all_distinct(out))
    throw NumericalError("tie-breaking noise left duplicate scores", 0.0);
  return out;
}

ScoreMatrix build_score_matrix(const ProbModel& model, const Matrix& instances, ScoreKind kind, std::uint64_t seed,
                               double noise_epsilon) {
  return build_score_matrix(model.predict_proba(instances), kind, seed, noise_epsilon);
}

bool all_distinct(const ScoreMatrix& scores) {
  std::vector<double> v(scores.values.data(), scores.values.data() + scores.values.size());
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) == v.end();
}

}  // namespace ucp
