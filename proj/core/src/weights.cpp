#include "ucp/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "ucp/error.hpp"

namespace ucp {

LabelWeights supervised_weights(std::span<const Label> labels, int num_classes) {
  LabelWeights w(labels.size(), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw RangeError("label " + std::to_string(labels[i] + 1) + " outside 1.." + std::to_string(num_classes));
    w(i, labels[i]) = 1.0;
  }
  return w;
}

LabelWeights naive_weights(const Matrix& probs) {
  const auto c = static_cast<int>(probs.cols());
  LabelWeights w(static_cast<std::size_t>(probs.rows()), c);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index y = 1; y < c; ++y)
      if (probs(i, y) > probs(i, best)) best = y;
    w(static_cast<std::size_t>(i), static_cast<Label>(best)) = 1.0;
  }
  return w;
}

LabelWeights naive_weights(const ProbModel& model, const Matrix& cal_instances) {
  return naive_weights(model.predict_proba(cal_instances));
}

void project_simplex_inplace(std::span<double> block) {
  const std::size_t c = block.size();
  if (c == 0) return;
  double sorted_buf[64];
  std::vector<double> heap_buf;
  double* u = sorted_buf;
  if (c > 64) {
    heap_buf.resize(c);
    u = heap_buf.data();
  }
  std::copy(block.begin(), block.end(), u);
  std::sort(u, u + c, std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  for (double& v : block) v = std::max(v - theta, 0.0);
}

std::vector<double> project_simplex_block(std::span<const double> block) {
  for (double v : block)
    if (!std::isfinite(v)) throw ValidationError("project_simplex_block: non-finite input");
  std::vector<double> out(block.begin(), block.end());
  project_simplex_inplace(out);
  return out;
}

void ConstraintSet::validate(std::size_t n, int c) const {
  if (static_cast<std::size_t>(B.size()) != n * static_cast<std::size_t>(c))
    throw ShapeError("constraint row length does not match the number of pairs");
  for (double v : B)
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("constraint entries must be finite and nonnegative");
  if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("constraint bound b must be positive");
}

ConstraintSet cross_entropy_constraint(const Matrix& cal_probs, double loss_bound) {
  ConstraintSet cs;
  cs.B.resize(cal_probs.size());
  for (Eigen::Index i = 0; i < cal_probs.rows(); ++i)
    for (Eigen::Index y = 0; y < cal_probs.cols(); ++y)
      cs.B(i * cal_probs.cols() + y) = -std::log(std::clamp(cal_probs(i, y), kProbFloor, 1.0 - kProbFloor));
  cs.b = static_cast<double>(cal_probs.rows()) * loss_bound;
  return cs;
}

double qp_objective(const LabelWeights& w, const KernelContext& ctx) {
  const double nd = static_cast<double>(ctx.n);
  const double md = static_cast<double>(ctx.m);
  return w.flat().dot(ctx.apply(w.flat())) / nd - 2.0 * ctx.v.dot(w.flat()) / md;
}

namespace {

struct InnerResult {
  Vector x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double step_change = 0.0;
  double projection_multiplier = 0.0;
  int projection_steps = 0;
  std::vector<double> trace;
};

void project_blocks(Vector& x, int c) {
  for (Eigen::Index i = 0; i < x.size(); i += c)
    project_simplex_inplace(std::span<double>(x.data() + i, static_cast<std::size_t>(c)));
}

// Euclidean projection onto {unit simplex blocks} ∩ {B x <= b}. The result is
// the blockwise simplex projection of z - mu B, with mu >= 0 the root of the
// nonincreasing map mu -> B x(mu) - b, found by bracketing and bisection.
// The returned point is always on the feasible side of the root.
class FeasibleProjector {
 public:
  FeasibleProjector(const ConstraintSet* cs, int c, double dual_tol, int max_steps)
      : cs_(cs), c_(c), dual_tol_(dual_tol), max_steps_(max_steps) {}

  void operator()(Vector& x) {
    if (!cs_) {
      project_blocks(x, c_);
      return;
    }
    const Vector z = x;
    const double b = cs_->b;
    const double tol = dual_tol_ * b;
    steps_ = 0;
    auto at = [&](double mu) {
      x = z - mu * cs_->B;
      project_blocks(x, c_);
      ++steps_;
      return b - cs_->B.dot(x);
    };
    if (at(0.0) >= 0.0) {
      mu_ = 0.0;
      return;
    }
    double lo = 0.0;
    double hi = mu_ > 0.0 ? mu_ : 1e-3;
    Vector hi_x;
    double s = at(hi);
    while (s < 0.0) {
      lo = hi;
      hi *= 4.0;
      if (hi > 1e300) throw InfeasibleError("loss inequality could not be met by the projection");
      s = at(hi);
    }
    hi_x = x;
    while (s > tol && steps_ < max_steps_ && hi - lo > 1e-15 * hi) {
      const double mid = 0.5 * (lo + hi);
      const double s_mid = at(mid);
      if (s_mid < 0.0) {
        lo = mid;
      } else {
        hi = mid;
        hi_x = x;
        s = s_mid;
      }
    }
    x = std::move(hi_x);
    mu_ = hi;
  }

  double multiplier() const noexcept { return mu_; }
  int steps() const noexcept { return steps_; }

 private:
  const ConstraintSet* cs_;
  int c_;
  double dual_tol_;
  int max_steps_;
  double mu_ = 0.0;
  int steps_ = 0;
};

// Accelerated projected gradient with function-value restart on
//   F(x) = (1/n) x'Kx - (2/m) v'x
// over the feasible set of the projector.
InnerResult minimize(const KernelContext& ctx, FeasibleProjector& project, const Vector& x0,
                     const SolverOptions& opts) {
  const double nd = static_cast<double>(ctx.n);
  const double lip = 2.0 / nd * std::max(ctx.max_row_sum(), std::numeric_limits<double>::min());
  const double step = 1.0 / lip;
  const Vector lin = -(2.0 / static_cast<double>(ctx.m)) * ctx.v;

  auto value = [&](const Vector& x, const Vector& kx) { return x.dot(kx) / nd + lin.dot(x); };

  InnerResult out;
  Vector x = x0;
  project(x);
  Vector kx = ctx.apply(x);
  double fx = value(x, kx);
  Vector y = x;
  Vector ky = kx;
  double t = 1.0;
  int quiet = 0;
  if (opts.record_trace) out.trace.push_back(fx);

  Vector x_new(x.size());
  for (int it = 0; it < opts.max_iters; ++it) {
    out.iterations = it + 1;
    x_new = y - step * ((2.0 / nd) * ky + lin);
    project(x_new);
    Vector kx_new = ctx.apply(x_new);
    const double f_new = value(x_new, kx_new);

    if (f_new > fx) {
      if (t == 1.0) {
        // A plain projected gradient step from x failed to descend: x is
        // stationary up to rounding.
        out.projection_multiplier = project.multiplier() / step;
        out.projection_steps = project.steps();
        out.converged = true;
        break;
      }
      // Restart momentum; the next step is a plain projected gradient step from x.
      t = 1.0;
      y = x;
      ky = kx;
      quiet = 0;
      continue;
    }
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_new;
    y = x_new + beta * (x_new - x);
    ky = kx_new + beta * (kx_new - kx);
    const double change = std::abs(fx - f_new) / std::max(1.0, std::abs(f_new));
    out.step_change = (x_new - x).norm() / std::max(x_new.norm(), std::numeric_limits<double>::min());
    out.projection_multiplier = project.multiplier() / step;
    out.projection_steps = project.steps();
    x.swap(x_new);
    kx.swap(kx_new);
    fx = f_new;
    t = t_new;
    if (opts.record_trace) out.trace.push_back(fx);
    quiet = change < opts.rel_tol ? quiet + 1 : 0;
    if (quiet >= 2) {
      out.converged = true;
      break;
    }
  }
  out.objective = fx;
  out.x = std::move(x);
  return out;
}

}  // namespace

WeightSolution solve_label_weights(const KernelContext& ctx, const std::optional<ConstraintSet>& constraints,
                                   const SolverOptions& opts, const LabelWeights* init) {
  const std::size_t nc = ctx.n * static_cast<std::size_t>(ctx.c);
  if (constraints) constraints->validate(ctx.n, ctx.c);

  Vector x0;
  if (init) {
    if (init->num_instances() != ctx.n || init->num_classes() != ctx.c) throw ShapeError("initial weights shape mismatch");
    x0 = init->flat();
  } else {
    x0 = Vector::Constant(static_cast<Eigen::Index>(nc), 1.0 / ctx.c);
  }

  if (constraints) {
    const auto& B = constraints->B;
    double best_case = 0.0;
    for (std::size_t i = 0; i < ctx.n; ++i)
      best_case += B.segment(static_cast<Eigen::Index>(i * ctx.c), ctx.c).minCoeff();
    if (best_case > constraints->b * (1.0 + opts.dual_tol))
      throw InfeasibleError("loss inequality infeasible: smallest attainable B w is " + std::to_string(best_case) +
                            " > b = " + std::to_string(constraints->b));
  }

  FeasibleProjector project(constraints ? &*constraints : nullptr, ctx.c, opts.dual_tol, opts.max_bisections);
  auto r = minimize(ctx, project, x0, opts);

  WeightSolution sol;
  sol.weights = LabelWeights(std::move(r.x), ctx.c);
  sol.report.objective_value = qp_objective(sol.weights, ctx);
  sol.report.iterations = r.iterations;
  sol.report.final_step_relative_change = r.step_change;
  sol.report.converged = r.converged;
  sol.report.multiplier = r.projection_multiplier;
  sol.report.bisections = r.projection_steps;
  sol.report.inequality_slack = constraints ? constraints->b - constraints->B.dot(sol.weights.flat())
                                            : std::numeric_limits<double>::infinity();
  sol.report.trace = std::move(r.trace);
  return sol;
}

}  // namespace ucp
