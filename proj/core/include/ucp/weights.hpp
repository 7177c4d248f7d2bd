#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ucp/classifier.hpp"
#include "ucp/kernel.hpp"
#include "ucp/label_weights.hpp"

namespace ucp {

// One-hot blocks at the given labels.
LabelWeights supervised_weights(std::span<const Label> labels, int num_classes);

// One-hot blocks at argmax p(y|x); ties go to the smallest label.
LabelWeights naive_weights(const ProbModel& model, const Matrix& cal_instances);
LabelWeights naive_weights(const Matrix& probs);

// Euclidean projection onto the probability simplex (sort-and-threshold).
std::vector<double> project_simplex_block(std::span<const double> block);
void project_simplex_inplace(std::span<double> block);

// Scalar inequality B w <= b on the flattened weights.
struct ConstraintSet {
  Vector B;  // length nc; B_{(i,y)} = loss of predicting instance i as label y
  double b = 0.0;
  void validate(std::size_t n, int c) const;
};

// B_{(i,y)} = -log p(y|X_i) (probabilities clamped) and b = n L.
ConstraintSet cross_entropy_constraint(const Matrix& cal_probs, double loss_bound);

struct SolverOptions {
  int max_iters = 20000;
  double rel_tol = 1e-7;
  double dual_tol = 1e-8;  // accepted slack of the projection, relative to b
  int max_bisections = 200;  // per projection onto the constrained set
  bool record_trace = false;
};

struct WeightSolution {
  LabelWeights weights;
  SolverReport report;
};

// (1/n) w'Kw - (2/m) v'w
double qp_objective(const LabelWeights& w, const KernelContext& ctx);

// Minimizes qp_objective over w >= 0 with unit blocks and optional B w <= b,
// by accelerated projected gradient with function-value restart. Each step is
// projected exactly onto the simplex blocks intersected with the half-space
// B w <= b, so every iterate is feasible. Starts from `init` (the naive
// weights in the pipeline) or uniform blocks. Throws InfeasibleError when even
// the per-block loss-minimizing vertex violates the inequality.
WeightSolution solve_label_weights(const KernelContext& ctx, const std::optional<ConstraintSet>& constraints,
                                   const SolverOptions& opts = {}, const LabelWeights* init = nullptr);

}  // namespace ucp
