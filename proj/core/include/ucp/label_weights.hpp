#pragma once

#include <span>
#include <vector>

#include "ucp/types.hpp"

namespace ucp {

// Per-instance probability vectors over labels, flattened instance-major:
// entry i*c + y holds w_i(y).
class LabelWeights {
 public:
  LabelWeights() = default;
  LabelWeights(std::size_t n, int c);  // all zeros
  LabelWeights(Vector flat, int c);

  std::size_t num_instances() const noexcept { return n_; }
  int num_classes() const noexcept { return c_; }

  double operator()(std::size_t i, Label y) const { return w_(static_cast<Eigen::Index>(i * c_ + y)); }
  double& operator()(std::size_t i, Label y) { return w_(static_cast<Eigen::Index>(i * c_ + y)); }

  const Vector& flat() const noexcept { return w_; }
  Vector& flat() noexcept { return w_; }

  // n x c row-major view of the same storage.
  Eigen::Map<const Matrix> as_matrix() const {
    return {w_.data(), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(c_)};
  }

  // Throws ValidationError unless every block is a probability vector.
  void validate(double tol = 1e-9) const;

 private:
  std::size_t n_ = 0;
  int c_ = 0;
  Vector w_;
};

struct SolverReport {
  double objective_value = 0.0;  // (1/n) w'Kw - (2/m) v'w at the returned weights
  int iterations = 0;
  double final_step_relative_change = 0.0;
  double inequality_slack = 0.0;  // b - Bw; +inf when no inequality is present
  double multiplier = 0.0;        // dual variable of the loss inequality at the last step
  int bisections = 0;             // root-finding steps of the last projection
  bool converged = false;
  std::vector<double> trace;  // accepted objective values of the final solve, when requested
};

}  // namespace ucp
