#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ucp::testing {

// Quadratic program over n blocks of c weights, each block on the simplex:
//   minimize (1/n) w' K w + lin' w,  K = blockdiag over labels of `gram`
// subject to an optional inequality ineq' w <= bound.
struct QpInstance {
  Eigen::MatrixXd gram;  // n x n
  int c = 1;
  Eigen::VectorXd lin;  // nc, pair order i*c + y
  std::optional<Eigen::VectorXd> ineq;
  double bound = 0.0;

  int n() const { return static_cast<int>(gram.rows()); }
  Eigen::MatrixXd full_matrix() const;  // nc x nc
  double objective(const Eigen::VectorXd& w) const;
  bool feasible(const Eigen::VectorXd& w, double tol) const;
};

struct QpOptimum {
  Eigen::VectorXd w;
  double value = 0.0;
  long faces_checked = 0;
};

// Global minimum by enumerating every combination of per-block supports and
// both states of the inequality, solving the equality-constrained stationarity
// system on each face (with a 1e-12 ridge so it is nonsingular) and keeping
// the best feasible point.
QpOptimum qp_face_enumeration(const QpInstance& qp);

// Exhaustive grid at the given resolution, refined locally: a pattern search
// around the best grid point, then an exact solve on every face formed by the
// constraints that are nearly active there. Only practical for a few free
// coordinates.
QpOptimum qp_grid_search(const QpInstance& qp, double resolution);

// Asymptotic Kolmogorov distribution: P(sqrt(T) D_T <= x).
double kolmogorov_cdf(double x);
// D with P(D_T > D) = level under the null, from the asymptotic law.
double kolmogorov_critical(double level, std::size_t sample_size);

// sup_x |F_T(x) - cdf(x)| for the empirical CDF of the sample.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

// Central differences of f at x with step h.
Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h);

}  // namespace ucp::testing
