#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ucp/label_weights.hpp"
#include "ucp/scores.hpp"
#include "ucp/types.hpp"

namespace ucp {

// Gaussian separable joint kernel
//   K((x, y), (x', y')) = exp(-||x - x'||^2 / (2 sigma^2)) * 1{y = y'}.
struct KernelSpec {
  double sigma = 1.0;
  void validate() const;
};

double kernel_eval(std::span<const double> x, Label y, std::span<const double> x2, Label y2, const KernelSpec& spec);

// sigma = sigma0 * sqrt(d / 2) for sigma0 in {10^(-1 + t/3), t = 0..9}.
std::vector<KernelSpec> default_bandwidth_grid(int num_features);
std::vector<KernelSpec> bandwidth_grid(int num_features, std::span<const double> sigma0);

// Pairwise squared Euclidean distances between the rows of a and b.
Matrix squared_distances(const Matrix& a, const Matrix& b);
Matrix gaussian_from_distances(const Matrix& sqdist, const KernelSpec& spec);

// Data of the kernel quadratic program. K over the nc calibration pairs is
// never formed: with the separable kernel it is block diagonal after grouping
// by label, and every block equals the n x n Gram matrix of the calibration
// instances, so K w is gram * W for W the n x c view of w.
struct KernelContext {
  KernelSpec spec;
  Matrix gram;        // n x n, K0(X_i, X_j)
  Vector v;           // nc, v_{(i,y)} = sum_j K((X_i, y), (X~_j, Y~_j))
  double train_self = 0.0;  // (1/m^2) 1' K~ 1
  double kappa = 1.0;       // sup of sqrt(K)
  std::size_t n = 0;
  std::size_t m = 0;
  int c = 0;

  Matrix cal_instances;
  Matrix train_instances;
  std::vector<Label> train_labels;

  Vector apply(const Vector& w) const;  // K w
  double entry(std::size_t a, std::size_t b) const;  // K_ab in pair ordering (i-1)c + y
  // Fraction of the nc x nc entries that are not structurally zero (= 1/c).
  double structural_density() const noexcept { return 1.0 / static_cast<double>(c); }
  // Largest row sum of the Gram matrix, an upper bound on the top eigenvalue of K.
  double max_row_sum() const;
};

KernelContext build_context(const Matrix& cal_instances, const Matrix& train_instances,
                            std::span<const Label> train_labels, int num_classes, const KernelSpec& spec);

// Squared MMD: (1/n^2) w'Kw - (2/(nm)) v'w + (1/m^2) 1'K~1.
double mmd_squared(const LabelWeights& w, const KernelContext& ctx);
// Square root of mmd_squared, clamped at 0 first.
double mmd_objective(const LabelWeights& w, const KernelContext& ctx);

enum class InterpolationStatus { converged, not_converged, pruned };

struct InterpolationOptions {
  double tol = 1e-6;          // on ||(K + jitter I) gamma - u|| relative to ||u||
  int max_iters = 1000;
  double jitter_scale = 1e-10;  // jitter = jitter_scale * mean(diag K)
  // Stop early once u'gamma exceeds this; its CG iterates only grow.
  double prune_above = std::numeric_limits<double>::infinity();
};

struct InterpolationResult {
  Vector gamma;
  double min_norm_sq = 0.0;  // u'gamma
  double residual = 0.0;     // ||K gamma - u||
  int iterations = 0;
  InterpolationStatus status = InterpolationStatus::converged;
};

// Conjugate gradients on (K + jitter I) gamma = u for a dense symmetric PSD K.
// Throws NumericalError (carrying the residual) when the cap is reached.
InterpolationResult min_norm_interpolation(const Eigen::MatrixXd& K, const Vector& u, double tol = 1e-10,
                                           int max_iters = 10000);

// Same system for the separable K given by its Gram block; u is in pair order.
// Never throws on non-convergence; inspect `status`.
InterpolationResult min_norm_interpolation(const Matrix& gram, int num_classes, const Vector& u,
                                           const InterpolationOptions& opts = {});

// u_{(i,y)} = 1{S(X_i, y) <= q}
Vector coverage_indicator(const ScoreMatrix& scores, double q);

struct CandidateReport {
  KernelSpec spec;
  double statistic = 0.0;  // u'gamma (a lower bound when pruned)
  double residual = 0.0;
  int iterations = 0;
  InterpolationStatus status = InterpolationStatus::converged;
  double lambda = 0.0;  // ridge parameter of the approximation rule
};

struct KernelSelection {
  KernelSpec best;
  std::size_t best_index = 0;
  double q0 = 0.0;  // rough quantile from the naive weights
  Vector indicator;
  std::vector<CandidateReport> candidates;  // same order as the input list
};

// Picks the candidate whose min-norm interpolant of the naive-quantile coverage
// indicator has the smallest squared norm; ties go to the smaller sigma.
KernelSelection select_kernel(std::span<const KernelSpec> candidates, const Matrix& cal_instances,
                              const ScoreMatrix& scores, const LabelWeights& naive_weights, double alpha,
                              const InterpolationOptions& opts = {});

// Ridge approximants f = K (K + lambda I)^{-1} u of an indicator u, with
// approximation error D = (1/n) sum_{i,y} |f(X_i, y) - u_{(i,y)}| and squared
// RKHS norm ||f||^2 = gamma' K gamma.
struct Approximation {
  double norm_sq = 0.0;
  double approx_error = 0.0;
  double lambda = 0.0;
  bool feasible = true;  // false when no lambda reaches the target error
};

// Largest lambda (hence smallest norm) on the ridge path whose error is at
// most target_error, located by bisection on log lambda over an exact
// eigendecomposition of the Gram block. O(n^3).
Approximation min_norm_approximation(const Matrix& gram, int num_classes, const Vector& u, double target_error);

// Single ridge solve by conjugate gradients, for sizes where the
// eigendecomposition is too costly.
Approximation ridge_approximation(const Matrix& gram, int num_classes, const Vector& u, double lambda,
                                  const InterpolationOptions& opts = {});

struct ApproximationSelectionOptions {
  // Target D as a fraction of the error of f = 0, i.e. of (1/n) sum u.
  double relative_error = 0.5;
  // Instances used for selection; a seeded subsample when n is larger.
  std::size_t max_instances = 400;
  std::uint64_t seed = 0;
};

// Picks the candidate with the smallest norm among epsilon-approximations of
// the naive-quantile coverage indicator, epsilon fixed by relative_error.
// Ties go to the smaller sigma; infeasible candidates are skipped.
KernelSelection select_kernel_approx(std::span<const KernelSpec> candidates, const Matrix& cal_instances,
                                     const ScoreMatrix& scores, const LabelWeights& naive_weights, double alpha,
                                     const ApproximationSelectionOptions& opts = {});

struct DualWitnessReport {
  double objective = 0.0;      // mmd_objective(w)
  double best_probe = 0.0;     // max over random unit-norm probes
  double witness_probe = 0.0;  // probe along the normalized mean-embedding difference
};

// Evaluates |weighted calibration mean - training mean| of unit-norm RKHS
// functions anchored at the calibration pairs and the training pairs. Kernel
// values are recomputed pointwise, independently of the context matrices.
DualWitnessReport dual_witness_check(const LabelWeights& w, const KernelContext& ctx, int random_probe_count,
                                     std::uint64_t seed);

}  // namespace ucp
