#include "ucp/bounds.hpp"

#include <cmath>
#include <string>

#include "ucp/error.hpp"

namespace ucp {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
}

double pair_rate(double n, double m) { return std::sqrt(1.0 / n + 1.0 / m); }

}  // namespace

SupervisedBounds supervised_coverage_bounds(std::size_t n, double alpha, double delta) {
  if (n == 0) throw ValidationError("n must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  check_delta(delta);
  const double nd = static_cast<double>(n);
  SupervisedBounds out;
  out.marginal = {1.0 - alpha, 1.0 - alpha + 1.0 / (nd + 1.0)};
  const double half = std::sqrt(std::log(2.0 / delta) / (2.0 * nd));
  out.conditional = {out.marginal.lo - half, out.marginal.hi + half};
  return out;
}

void BoundInputs::validate() const {
  if (!(n > 0.0) || !(m > 0.0)) throw ValidationError("sample counts must be positive");
  check_delta(delta);
  if (!(kappa >= 0.0) || !(rkhs_norm >= 0.0) || !(approx_error >= 0.0) || !(v_opt >= 0.0))
    throw ValidationError("bound inputs must be nonnegative");
  if (num_candidates < 1) throw ValidationError("num_candidates must be at least 1");
}

double excess_gap_kernel(const BoundInputs& in, bool union_bound) {
  in.validate();
  const double s = union_bound ? static_cast<double>(in.num_candidates) : 1.0;
  return in.approx_error +
         2.0 * in.kappa * (1.0 + std::sqrt(std::log(2.0 * s / in.delta))) * pair_rate(in.n, in.m) * in.rkhs_norm;
}

double excess_gap_general(const BoundInputs& in, double rademacher_n, double rademacher_m, double bounded_diff) {
  in.validate();
  if (!(rademacher_n >= 0.0) || !(rademacher_m >= 0.0) || !(bounded_diff >= 0.0))
    throw ValidationError("complexity terms must be nonnegative");
  return in.v_opt + in.approx_error + 2.0 * (rademacher_n + rademacher_m) +
         bounded_diff * std::sqrt((1.0 / in.n + 1.0 / in.m) * std::log(2.0 / in.delta) / 2.0);
}

double objective_value_bound(double kappa, double rkhs_norm, double n, double m, double delta, double eps_opt) {
  if (!(n > 0.0) || !(m > 0.0)) throw ValidationError("sample counts must be positive");
  check_delta(delta);
  const double kr = kappa * rkhs_norm;
  return eps_opt + 2.0 * kr * (1.0 / std::sqrt(n) + 1.0 / std::sqrt(m)) +
         2.0 * kr * std::sqrt((1.0 / n + 1.0 / m) * std::log(1.0 / delta) / 2.0);
}

double coverage_error_bound_kernel(const BoundInputs& in) {
  in.validate();
  return in.approx_error +
         2.0 * in.kappa * (1.0 + std::sqrt(std::log(1.0 / in.delta))) * in.rkhs_norm * pair_rate(in.n, in.m);
}

double coverage_diagnostic_E(const LabelWeights& w, const ScoreMatrix& scores, double q_hat,
                             std::span<const Label> true_labels) {
  const std::size_t n = scores.rows();
  const int c = scores.num_classes();
  if (w.num_instances() != n || w.num_classes() != c || true_labels.size() != n)
    throw ShapeError("diagnostic inputs disagree in shape");
  if (n == 0) throw EmptyInputError("diagnostic needs at least one instance");
  double labeled = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = scores.row(i);
    const Label y_true = true_labels[i];
    if (y_true < 0 || y_true >= c) throw RangeError("label " + std::to_string(y_true + 1) + " out of range");
    if (row[static_cast<std::size_t>(y_true)] <= q_hat) labeled += 1.0;
    for (Label y = 0; y < c; ++y)
      if (row[static_cast<std::size_t>(y)] <= q_hat) weighted += w(i, y);
  }
  return (labeled - weighted) / static_cast<double>(n);
}

}  // namespace ucp
