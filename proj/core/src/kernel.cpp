#include "ucp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "ucp/data.hpp"
#include "ucp/error.hpp"
#include "ucp/quantile.hpp"
#include "ucp/rng.hpp"

namespace ucp {

void KernelSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("kernel bandwidth must be positive");
}

double kernel_eval(std::span<const double> x, Label y, std::span<const double> x2, Label y2, const KernelSpec& spec) {
  if (x.size() != x2.size()) throw ShapeError("kernel_eval: feature dimension mismatch");
  if (y != y2) return 0.0;
  double d2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = x[j] - x2[j];
    d2 += diff * diff;
  }
  return std::exp(-d2 / (2.0 * spec.sigma * spec.sigma));
}

std::vector<KernelSpec> bandwidth_grid(int num_features, std::span<const double> sigma0) {
  if (num_features < 1) throw ValidationError("bandwidth grid needs d >= 1");
  const double scale = std::sqrt(static_cast<double>(num_features) / 2.0);
  std::vector<KernelSpec> out;
  out.reserve(sigma0.size());
  for (double s0 : sigma0) {
    KernelSpec k{s0 * scale};
    k.validate();
    out.push_back(k);
  }
  return out;
}

std::vector<KernelSpec> default_bandwidth_grid(int num_features) {
  std::vector<double> s0(10);
  for (int t = 0; t < 10; ++t) s0[static_cast<std::size_t>(t)] = std::pow(10.0, -1.0 + t / 3.0);
  return bandwidth_grid(num_features, s0);
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("squared_distances: dimension mismatch");
  const Vector na = a.rowwise().squaredNorm();
  const Vector nb = b.rowwise().squaredNorm();
  Matrix d = -2.0 * (a * b.transpose());
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

Matrix gaussian_from_distances(const Matrix& sqdist, const KernelSpec& spec) {
  spec.validate();
  const double scale = -1.0 / (2.0 * spec.sigma * spec.sigma);
  return (sqdist.array() * scale).exp().matrix();
}

namespace {

// Symmetric self-distance matrix with an exact zero diagonal.
Matrix self_distances(const Matrix& x) {
  Matrix d = squared_distances(x, x);
  Matrix sym = 0.5 * (d + d.transpose());
  sym.diagonal().setZero();
  return sym;
}

}  // namespace

Vector KernelContext::apply(const Vector& w) const {
  if (static_cast<std::size_t>(w.size()) != n * static_cast<std::size_t>(c)) throw ShapeError("K w: length mismatch");
  Eigen::Map<const Matrix> wm(w.data(), static_cast<Eigen::Index>(n), c);
  Matrix kw = gram * wm;
  return Eigen::Map<const Vector>(kw.data(), kw.size());
}

double KernelContext::entry(std::size_t a, std::size_t b) const {
  const auto cc = static_cast<std::size_t>(c);
  if (a % cc != b % cc) return 0.0;
  return gram(static_cast<Eigen::Index>(a / cc), static_cast<Eigen::Index>(b / cc));
}

double KernelContext::max_row_sum() const { return gram.rowwise().sum().maxCoeff(); }

KernelContext build_context(const Matrix& cal_instances, const Matrix& train_instances,
                            std::span<const Label> train_labels, int num_classes, const KernelSpec& spec) {
  spec.validate();
  if (cal_instances.rows() == 0 || train_instances.rows() == 0) throw EmptyInputError("kernel context needs data");
  if (cal_instances.cols() != train_instances.cols()) throw ShapeError("calibration/training dimension mismatch");
  if (static_cast<std::size_t>(train_instances.rows()) != train_labels.size())
    throw ShapeError("training labels do not match training instances");
  if (num_classes < 1) throw ValidationError("kernel context needs at least one class");

  KernelContext ctx;
  ctx.spec = spec;
  ctx.n = static_cast<std::size_t>(cal_instances.rows());
  ctx.m = static_cast<std::size_t>(train_instances.rows());
  ctx.c = num_classes;
  ctx.cal_instances = cal_instances;
  ctx.train_instances = train_instances;
  ctx.train_labels.assign(train_labels.begin(), train_labels.end());
  for (Label y : ctx.train_labels)
    if (y < 0 || y >= num_classes) throw RangeError("training label out of range");

  ctx.gram = gaussian_from_distances(self_distances(cal_instances), spec);

  const Matrix cross = gaussian_from_distances(squared_distances(cal_instances, train_instances), spec);
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(ctx.n), num_classes);
  for (std::size_t j = 0; j < ctx.m; ++j) v.col(ctx.train_labels[j]) += cross.col(static_cast<Eigen::Index>(j));
  ctx.v = Eigen::Map<const Vector>(v.data(), v.size());

  const Matrix train_gram = gaussian_from_distances(self_distances(train_instances), spec);
  double self_sum = 0.0;
  for (std::size_t j = 0; j < ctx.m; ++j)
    for (std::size_t k = 0; k < ctx.m; ++k)
      if (ctx.train_labels[j] == ctx.train_labels[k])
        self_sum += train_gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  const double md = static_cast<double>(ctx.m);
  ctx.train_self = self_sum / (md * md);
  return ctx;
}

double mmd_squared(const LabelWeights& w, const KernelContext& ctx) {
  if (w.num_instances() != ctx.n || w.num_classes() != ctx.c) throw ShapeError("mmd: weight shape mismatch");
  const double nd = static_cast<double>(ctx.n);
  const double md = static_cast<double>(ctx.m);
  const Vector kw = ctx.apply(w.flat());
  return w.flat().dot(kw) / (nd * nd) - 2.0 * ctx.v.dot(w.flat()) / (nd * md) + ctx.train_self;
}

double mmd_objective(const LabelWeights& w, const KernelContext& ctx) {
  return std::sqrt(std::max(0.0, mmd_squared(w, ctx)));
}

namespace {

using ColMatrix = Eigen::MatrixXd;

// Independent conjugate-gradient runs on the columns of rhs, sharing one
// operator application per iteration.
template <class Apply>
InterpolationResult conjugate_gradients(Apply&& apply, const ColMatrix& rhs, double jitter,
                                        const InterpolationOptions& opts, ColMatrix& x) {
  const auto cols = rhs.cols();
  x = ColMatrix::Zero(rhs.rows(), cols);
  ColMatrix r = rhs;
  ColMatrix p = r;
  Eigen::VectorXd rs = r.colwise().squaredNorm().transpose();
  const double rhs_norm = rhs.norm();
  const double target = opts.tol * std::max(rhs_norm, std::numeric_limits<double>::min());

  InterpolationResult out;
  out.status = InterpolationStatus::not_converged;
  if (rhs_norm == 0.0) {
    out.status = InterpolationStatus::converged;
    return out;
  }
  for (int it = 0; it < opts.max_iters; ++it) {
    if (std::sqrt(rs.sum()) <= target) {
      out.status = InterpolationStatus::converged;
      break;
    }
    ColMatrix ap = apply(p);
    ap += jitter * p;
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (rs(k) == 0.0) continue;
      const double denom = p.col(k).dot(ap.col(k));
      if (!(denom > 0.0)) continue;
      const double a = rs(k) / denom;
      x.col(k) += a * p.col(k);
      r.col(k) -= a * ap.col(k);
      const double rs_new = r.col(k).squaredNorm();
      p.col(k) = r.col(k) + (rs_new / rs(k)) * p.col(k);
      rs(k) = rs_new;
    }
    out.iterations = it + 1;
    if (std::isfinite(opts.prune_above)) {
      const double stat = (rhs.array() * x.array()).sum();
      if (stat > opts.prune_above * (1.0 + 1e-9)) {
        out.status = InterpolationStatus::pruned;
        break;
      }
    }
  }
  if (out.status == InterpolationStatus::not_converged && std::sqrt(rs.sum()) <= target)
    out.status = InterpolationStatus::converged;
  out.min_norm_sq = (rhs.array() * x.array()).sum();
  return out;
}

}  // namespace

InterpolationResult min_norm_interpolation(const Eigen::MatrixXd& K, const Vector& u, double tol, int max_iters) {
  if (K.rows() != K.cols() || K.rows() != u.size()) throw ShapeError("min_norm_interpolation: shape mismatch");
  InterpolationOptions opts;
  opts.tol = tol;
  opts.max_iters = max_iters;
  const double jitter = opts.jitter_scale * (K.rows() > 0 ? K.diagonal().mean() : 0.0);
  ColMatrix x;
  auto out = conjugate_gradients([&](const ColMatrix& p) -> ColMatrix { return K * p; }, ColMatrix(u), jitter, opts, x);
  out.gamma = x.col(0);
  out.residual = (K * out.gamma - u).norm();
  if (out.status != InterpolationStatus::converged)
    throw NumericalError("conjugate gradients did not converge in " + std::to_string(max_iters) + " iterations",
                         out.residual);
  return out;
}

InterpolationResult min_norm_interpolation(const Matrix& gram, int num_classes, const Vector& u,
                                           const InterpolationOptions& opts) {
  const auto n = gram.rows();
  if (gram.cols() != n || u.size() != n * num_classes) throw ShapeError("min_norm_interpolation: shape mismatch");
  const double jitter = opts.jitter_scale * (n > 0 ? gram.diagonal().mean() : 0.0);
  // Column y of rhs holds u restricted to label y.
  ColMatrix rhs = Eigen::Map<const Matrix>(u.data(), n, num_classes);
  ColMatrix x;
  auto out = conjugate_gradients([&](const ColMatrix& p) -> ColMatrix { return gram * p; }, rhs, jitter, opts, x);
  Matrix xr = x;  // back to pair order
  out.gamma = Eigen::Map<const Vector>(xr.data(), xr.size());
  Matrix kx = gram * x;
  Matrix res = kx - Matrix(rhs);
  out.residual = res.norm();
  return out;
}

Vector coverage_indicator(const ScoreMatrix& scores, double q) {
  Vector u(scores.values.size());
  const auto c = scores.values.cols();
  for (Eigen::Index i = 0; i < scores.values.rows(); ++i)
    for (Eigen::Index y = 0; y < c; ++y) u(i * c + y) = scores.values(i, y) <= q ? 1.0 : 0.0;
  return u;
}

KernelSelection select_kernel(std::span<const KernelSpec> candidates, const Matrix& cal_instances,
                              const ScoreMatrix& scores, const LabelWeights& naive_weights, double alpha,
                              const InterpolationOptions& opts) {
  if (candidates.empty()) throw ValidationError("select_kernel needs at least one candidate");
  if (scores.rows() != static_cast<std::size_t>(cal_instances.rows()))
    throw ShapeError("select_kernel: score rows do not match calibration instances");

  KernelSelection sel;
  sel.q0 = conformal_quantile_weighted(scores, naive_weights, alpha, Method::naive).q_hat;
  sel.indicator = coverage_indicator(scores, sel.q0);
  sel.candidates.resize(candidates.size());

  // Smaller bandwidths first: they are cheap to solve and give tight pruning
  // bounds, and a strict comparison then keeps the smaller sigma on ties.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return candidates[a].sigma < candidates[b].sigma; });

  const Matrix dist = self_distances(cal_instances);
  double best_stat = std::numeric_limits<double>::infinity();
  bool found = false;
  double last_residual = 0.0;
  for (std::size_t idx : order) {
    const auto& spec = candidates[idx];
    const Matrix gram = gaussian_from_distances(dist, spec);
    InterpolationOptions o = opts;
    o.prune_above = best_stat;
    const auto res = min_norm_interpolation(gram, scores.num_classes(), sel.indicator, o);
    sel.candidates[idx] = {spec, res.min_norm_sq, res.residual, res.iterations, res.status};
    last_residual = res.residual;
    if (res.status != InterpolationStatus::converged) continue;
    if (!found || res.min_norm_sq < best_stat) {
      best_stat = res.min_norm_sq;
      sel.best_index = idx;
      sel.best = spec;
      found = true;
    }
  }
  if (!found) throw NumericalError("no kernel candidate admitted a converged interpolation", last_residual);
  return sel;
}

namespace {

// Ridge path of one Gram block through its eigendecomposition.
class RidgePath {
 public:
  RidgePath(const Matrix& gram, const ColMatrix& rhs) : rhs_(rhs) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(gram)};
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed", 0.0);
    values_ = eig.eigenvalues().cwiseMax(0.0);
    vectors_ = eig.eigenvectors();
    coef_ = vectors_.transpose() * rhs;
  }

  // D and ||f||^2 at lambda.
  std::pair<double, double> evaluate(double lambda) const {
    const Eigen::ArrayXd shrink = lambda / (values_.array() + lambda);
    const ColMatrix err = vectors_ * (coef_.array().colwise() * shrink).matrix();
    const Eigen::ArrayXd fw = values_.array() / ((values_.array() + lambda) * (values_.array() + lambda));
    const double norm_sq = (coef_.array().square().colwise() * fw).sum();
    return {err.cwiseAbs().sum() / static_cast<double>(rhs_.rows()), norm_sq};
  }

 private:
  ColMatrix rhs_;
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
  ColMatrix coef_;
};

constexpr double kLogLambdaLo = -14.0;
constexpr double kLogLambdaHi = 8.0;
constexpr int kBisectionSteps = 60;

Approximation approximate_on_path(const RidgePath& path, double target) {
  Approximation out;
  const auto hi = path.evaluate(std::pow(10.0, kLogLambdaHi));
  if (hi.first <= target) return {hi.second, hi.first, std::pow(10.0, kLogLambdaHi), true};
  const auto lo = path.evaluate(std::pow(10.0, kLogLambdaLo));
  if (lo.first > target) return {lo.second, lo.first, std::pow(10.0, kLogLambdaLo), false};
  double a = kLogLambdaLo, b = kLogLambdaHi;
  auto best = lo;
  double best_log = a;
  for (int k = 0; k < kBisectionSteps; ++k) {
    const double mid = 0.5 * (a + b);
    const auto val = path.evaluate(std::pow(10.0, mid));
    if (val.first <= target) {
      a = mid;
      best = val;
      best_log = mid;
    } else {
      b = mid;
    }
  }
  return {best.second, best.first, std::pow(10.0, best_log), true};
}

ColMatrix indicator_columns(const Vector& u, Eigen::Index n, int c) {
  return Eigen::Map<const Matrix>(u.data(), n, c);
}

}  // namespace

Approximation min_norm_approximation(const Matrix& gram, int num_classes, const Vector& u, double target_error) {
  const auto n = gram.rows();
  if (gram.cols() != n || u.size() != n * num_classes) throw ShapeError("min_norm_approximation: shape mismatch");
  if (n == 0) throw EmptyInputError("min_norm_approximation: empty Gram matrix");
  return approximate_on_path(RidgePath(gram, indicator_columns(u, n, num_classes)), target_error);
}

Approximation ridge_approximation(const Matrix& gram, int num_classes, const Vector& u, double lambda,
                                  const InterpolationOptions& opts) {
  const auto n = gram.rows();
  if (gram.cols() != n || u.size() != n * num_classes) throw ShapeError("ridge_approximation: shape mismatch");
  if (!(lambda > 0.0)) throw ValidationError("ridge parameter must be positive");
  const ColMatrix rhs = indicator_columns(u, n, num_classes);
  InterpolationOptions o = opts;
  o.prune_above = std::numeric_limits<double>::infinity();
  ColMatrix gamma;
  const auto res = conjugate_gradients([&](const ColMatrix& p) -> ColMatrix { return gram * p; }, rhs, lambda, o, gamma);
  const ColMatrix f = gram * gamma;
  Approximation out;
  out.lambda = lambda;
  out.norm_sq = std::max(0.0, (gamma.array() * f.array()).sum());
  out.approx_error = (f - rhs).cwiseAbs().sum() / static_cast<double>(n);
  out.feasible = res.status == InterpolationStatus::converged;
  return out;
}

KernelSelection select_kernel_approx(std::span<const KernelSpec> candidates, const Matrix& cal_instances,
                                     const ScoreMatrix& scores, const LabelWeights& naive_weights, double alpha,
                                     const ApproximationSelectionOptions& opts) {
  if (candidates.empty()) throw ValidationError("select_kernel_approx needs at least one candidate");
  if (scores.rows() != static_cast<std::size_t>(cal_instances.rows()))
    throw ShapeError("select_kernel_approx: score rows do not match calibration instances");
  if (!(opts.relative_error > 0.0 && opts.relative_error < 1.0))
    throw ValidationError("relative_error must lie in (0, 1)");

  KernelSelection sel;
  sel.q0 = conformal_quantile_weighted(scores, naive_weights, alpha, Method::naive).q_hat;
  sel.indicator = coverage_indicator(scores, sel.q0);
  sel.candidates.resize(candidates.size());

  const int c = scores.num_classes();
  const auto n = static_cast<std::size_t>(cal_instances.rows());
  Matrix sub_x = cal_instances;
  Vector sub_u = sel.indicator;
  if (opts.max_instances > 0 && n > opts.max_instances) {
    auto idx = random_indices(n, opts.max_instances, opts.seed);
    std::sort(idx.begin(), idx.end());
    sub_x.resize(static_cast<Eigen::Index>(idx.size()), cal_instances.cols());
    sub_u.resize(static_cast<Eigen::Index>(idx.size()) * c);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      sub_x.row(static_cast<Eigen::Index>(k)) = cal_instances.row(static_cast<Eigen::Index>(idx[k]));
      sub_u.segment(static_cast<Eigen::Index>(k) * c, c) = sel.indicator.segment(static_cast<Eigen::Index>(idx[k]) * c, c);
    }
  }
  const auto ns = sub_x.rows();
  const double target = opts.relative_error * sub_u.sum() / static_cast<double>(ns);
  const ColMatrix rhs = indicator_columns(sub_u, ns, c);

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return candidates[a].sigma < candidates[b].sigma; });

  const Matrix dist = self_distances(sub_x);
  bool found = false;
  double best_stat = 0.0;
  for (std::size_t idx : order) {
    const auto& spec = candidates[idx];
    const RidgePath path(gaussian_from_distances(dist, spec), rhs);
    const auto a = approximate_on_path(path, target);
    auto& rep = sel.candidates[idx];
    rep = {spec, a.norm_sq, a.approx_error, kBisectionSteps,
           a.feasible ? InterpolationStatus::converged : InterpolationStatus::not_converged, a.lambda};
    if (!a.feasible) continue;
    if (!found || a.norm_sq < best_stat) {
      best_stat = a.norm_sq;
      sel.best_index = idx;
      sel.best = spec;
      found = true;
    }
  }
  if (!found) throw NumericalError("no kernel candidate reached the approximation target", target);
  return sel;
}

DualWitnessReport dual_witness_check(const LabelWeights& w, const KernelContext& ctx, int random_probe_count,
                                     std::uint64_t seed) {
  if (w.num_instances() != ctx.n || w.num_classes() != ctx.c) throw ShapeError("dual_witness_check: shape mismatch");
  const std::size_t nc = ctx.n * static_cast<std::size_t>(ctx.c);
  const std::size_t anchors = nc + ctx.m;
  const auto d = static_cast<std::size_t>(ctx.cal_instances.cols());

  auto point = [&](std::size_t a) -> std::pair<std::span<const double>, Label> {
    if (a < nc) {
      const auto i = a / static_cast<std::size_t>(ctx.c);
      return {{ctx.cal_instances.data() + i * d, d}, static_cast<Label>(a % static_cast<std::size_t>(ctx.c))};
    }
    const auto j = a - nc;
    return {{ctx.train_instances.data() + j * d, d}, ctx.train_labels[j]};
  };
  Eigen::MatrixXd kpp(anchors, anchors);
  for (std::size_t a = 0; a < anchors; ++a) {
    const auto [xa, ya] = point(a);
    for (std::size_t b = a; b < anchors; ++b) {
      const auto [xb, yb] = point(b);
      kpp(a, b) = kpp(b, a) = kernel_eval(xa, ya, xb, yb, ctx.spec);
    }
  }
  const double nd = static_cast<double>(ctx.n);
  const double md = static_cast<double>(ctx.m);
  // Signed measure: w/n on calibration pairs, -1/m on training pairs.
  Vector measure(anchors);
  measure.head(nc) = w.flat() / nd;
  measure.tail(ctx.m).setConstant(-1.0 / md);

  auto probe = [&](const Vector& gamma) {
    const Vector values = kpp * gamma;  // f at every anchor
    const double norm2 = gamma.dot(values);
    if (!(norm2 > 0.0)) return 0.0;
    return std::abs(measure.dot(values)) / std::sqrt(norm2);
  };

  DualWitnessReport rep;
  rep.objective = mmd_objective(w, ctx);
  rep.witness_probe = probe(measure);
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < random_probe_count; ++t) {
    Vector gamma(anchors);
    for (auto& g : gamma) g = gauss(rng);
    rep.best_probe = std::max(rep.best_probe, probe(gamma));
  }
  return rep;
}

}  // namespace ucp
