#pragma once

#include <span>
#include <utility>

#include "ucp/label_weights.hpp"
#include "ucp/scores.hpp"

namespace ucp {

struct CoverageInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SupervisedBounds {
  CoverageInterval marginal;     // (1 - alpha, 1 - alpha + 1/(n+1))
  CoverageInterval conditional;  // marginal widened by sqrt(log(2/delta) / (2n))
};

SupervisedBounds supervised_coverage_bounds(std::size_t n, double alpha, double delta);

struct BoundInputs {
  double n = 1.0;
  double m = 1.0;
  double alpha = 0.1;
  double delta = 0.1;
  double kappa = 1.0;
  double rkhs_norm = 0.0;     // R
  double approx_error = 0.0;  // D
  double v_opt = 0.0;         // rooted objective value
  int num_candidates = 1;     // s
  void validate() const;
};

// D + 2 kappa (1 + sqrt(log(2s/delta))) sqrt(1/n + 1/m) R. With
// union_bound = false the factor s is dropped.
double excess_gap_kernel(const BoundInputs& in, bool union_bound = true);

// V_opt + D + 2 (Rad_n + Rad_m) + B sqrt((1/n + 1/m) log(2/delta) / 2).
double excess_gap_general(const BoundInputs& in, double rademacher_n, double rademacher_m, double bounded_diff);

// eps_opt + 2 kappa R (1/sqrt(n) + 1/sqrt(m)) + 2 kappa R sqrt((1/n + 1/m) log(1/delta) / 2).
double objective_value_bound(double kappa, double rkhs_norm, double n, double m, double delta, double eps_opt);

// Bound on |E| for the kernel family at a single kernel:
// D + 2 kappa (1 + sqrt(log(1/delta))) R sqrt(1/n + 1/m).
double coverage_error_bound_kernel(const BoundInputs& in);

// E = (1/n) sum_i X(X_i, Y_i) - (1/n) sum_{i,y} w_i(y) X(X_i, y), X(x, y) = 1{S(x, y) <= q_hat}.
double coverage_diagnostic_E(const LabelWeights& w, const ScoreMatrix& scores, double q_hat,
                             std::span<const Label> true_labels);

}  // namespace ucp
