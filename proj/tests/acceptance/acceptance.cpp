// Acceptance checks. Prints one line per criterion:
//   criterion <k>: PASS|FAIL <details>
// Criteria can be selected by number on the command line; default is all.
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "oracles.hpp"
#include "ucp/bounds.hpp"
#include "ucp/classifier.hpp"
#include "ucp/harness.hpp"
#include "ucp/kernel.hpp"
#include "ucp/quantile.hpp"
#include "ucp/rng.hpp"
#include "ucp/scores.hpp"
#include "ucp/weights.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Three-class mixture on a triangle of radius 1.2; logistic error is about 0.23.
ucp::SyntheticConfig triangle_mixture() {
  const double h = 1.2 * std::sqrt(3.0) / 2.0;
  return {{{1.2, 0.0}, {-0.6, h}, {-0.6, -h}}, 1.0, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
}

// Ten classes in ten dimensions, means 2 e_k.
ucp::SyntheticConfig ten_class_mixture() {
  ucp::SyntheticConfig cfg;
  for (int k = 0; k < 10; ++k) {
    std::vector<double> mu(10, 0.0);
    mu[k] = 2.0;
    cfg.means.push_back(mu);
  }
  cfg.covariance_scale = 1.0;
  cfg.priors.assign(10, 0.1);
  return cfg;
}

ucp::ExperimentConfig base_config() {
  ucp::ExperimentConfig cfg;
  cfg.synthetic = triangle_mixture();
  cfg.train_size = 2000;
  cfg.validation_size = 300;
  cfg.test_size = 5000;
  cfg.alpha = 0.1;
  cfg.delta = 0.1;
  cfg.workers = 1;
  return cfg;
}

const ucp::MethodSummary* find_summary(const ucp::ExperimentResults& r, std::size_t n, ucp::Method m) {
  for (const auto& s : r.summaries)
    if (s.n == n && s.method == m) return &s;
  return nullptr;
}

double mean_classifier_error(const ucp::ExperimentResults& r, std::size_t n) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& rec : r.records)
    if (rec.ok && rec.n == n) {
      total += rec.classifier_error;
      ++count;
    }
  return count ? total / static_cast<double>(count) : std::nan("");
}

// Shared by criteria 3, 4, 5 and 9.
struct GapStudy {
  ucp::ExperimentResults small;  // n = 100, 500
  ucp::ExperimentResults large;  // n = 2000
  double seconds = 0.0;
};

const GapStudy& gap_study() {
  static std::optional<GapStudy> study;
  if (!study) {
    const auto t0 = Clock::now();
    GapStudy s;
    auto cfg = base_config();
    cfg.trials = 100;
    cfg.seed = 20240501;
    cfg.cal_sizes = {100, 500};
    s.small = ucp::run_experiment(cfg);
    cfg.cal_sizes = {2000};
    s.large = ucp::run_experiment(cfg);
    s.seconds = seconds_since(t0);
    study = std::move(s);
  }
  return *study;
}

const ucp::ExperimentResults& results_for(const GapStudy& s, std::size_t n) { return n == 2000 ? s.large : s.small; }

Verdict criterion1() {
  const auto t0 = Clock::now();
  auto cfg = base_config();
  cfg.train_size = 1000;
  cfg.test_size = 1000;
  cfg.cal_sizes = {100};
  cfg.trials = 2000;
  cfg.seed = 101;
  cfg.methods = {ucp::Method::supervised};
  const auto res = ucp::run_experiment(cfg);
  const double secs = seconds_since(t0);
  const auto* s = find_summary(res, 100, ucp::Method::supervised);
  if (!s || !res.complete()) return {false, fmt("%zu of %zu trials failed", res.failed, res.records.size())};
  const auto band = ucp::supervised_coverage_bounds(100, cfg.alpha, cfg.delta).marginal;
  const double lo = band.lo - 0.005, hi = band.hi + 0.005;
  const bool ok = s->coverage_mean >= lo && s->coverage_mean <= hi && secs < 120.0;
  return {ok, fmt("mean coverage %.4f over %zu trials, accepted [%.4f, %.4f]; %.1f s (limit 120 s)", s->coverage_mean,
                  s->count, lo, hi, secs)};
}

Verdict criterion2() {
  const std::size_t n = 50, trials = 2000;
  const double alpha = 0.2;
  const auto mix = triangle_mixture();
  const auto train = ucp::generate_synthetic(mix, 1000, 7001).data;
  const auto model = ucp::train_logistic(train);

  // Reference law of the true-label score, from a large independent sample.
  const long ref_count = 400000;
  const auto ref = ucp::generate_synthetic(mix, ref_count, 7002).data;
  const auto ref_scores = ucp::build_score_matrix(model.predict_proba(ref.instances()), ucp::ScoreKind::adaptive, 7003);
  std::vector<double> ref_true = ucp::scores_at_labels(ref_scores, ref.labels());
  std::sort(ref_true.begin(), ref_true.end());
  auto coverage_of = [&](double q) {
    return static_cast<double>(std::upper_bound(ref_true.begin(), ref_true.end(), q) - ref_true.begin()) /
           static_cast<double>(ref_true.size());
  };

  std::vector<double> cond;
  bool distinct = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto cal = ucp::generate_synthetic(mix, static_cast<long>(n), ucp::derive_seed(7004, {t})).data;
    const auto scores = ucp::build_score_matrix(model.predict_proba(cal.instances()), ucp::ScoreKind::adaptive,
                                                ucp::derive_seed(7005, {t}));
    distinct = distinct && ucp::all_distinct(scores);
    const auto q = ucp::conformal_quantile_supervised(ucp::scores_at_labels(scores, cal.labels()), alpha).q_hat;
    cond.push_back(coverage_of(q));
  }
  const double k = std::floor((n + 1) * alpha);
  const double a = static_cast<double>(n) + 1.0 - k, b = k;
  const double d = ucp::testing::ks_distance(cond, [&](double x) {
    return x <= 0.0 ? 0.0 : x >= 1.0 ? 1.0 : boost::math::ibeta(a, b, x);
  });
  const double crit = ucp::testing::kolmogorov_critical(0.01, trials);
  return {distinct && d < crit,
          fmt("KS distance %.4f vs Beta(%.0f, %.0f), 1%% critical value %.4f; scores distinct: %s", d, a, b, crit,
              distinct ? "yes" : "no")};
}

Verdict criterion3() {
  const auto& s = gap_study();
  const auto* u500 = find_summary(s.small, 500, ucp::Method::unsupervised);
  const auto* u2000 = find_summary(s.large, 2000, ucp::Method::unsupervised);
  if (!u500 || !u2000 || !s.small.complete() || !s.large.complete())
    return {false, fmt("failed units: %zu + %zu", s.small.failed, s.large.failed)};
  const double err = mean_classifier_error(s.small, 500);
  const bool err_ok = err >= 0.15 && err <= 0.25;
  const bool cov_ok = std::abs(u500->coverage_mean - 0.9) <= 0.03;
  const bool gap_ok = u2000->gap_mean <= 0.02;
  return {err_ok && cov_ok && gap_ok,
          fmt("classifier error %.4f (need 0.15-0.25); n=m=500 mean coverage %.4f over %zu trials (need 0.90 +- "
              "0.03); n=m=2000 mean gap %.4f over %zu trials (need <= 0.02); %.0f s",
              err, u500->coverage_mean, u500->count, u2000->gap_mean, u2000->count, s.seconds)};
}

Verdict criterion4() {
  const auto& s = gap_study();
  std::string detail;
  bool beats = true;
  std::size_t configs = 0, separated = 0;
  for (std::size_t n : {100, 500, 2000}) {
    const auto& r = results_for(s, n);
    const auto* nv = find_summary(r, n, ucp::Method::naive);
    const auto* un = find_summary(r, n, ucp::Method::unsupervised);
    if (!nv || !un) return {false, "missing summaries"};
    const double err = mean_classifier_error(r, n);
    const bool sep = nv->gap_mean > 0.5 * err;
    if (n != 100) beats = beats && nv->gap_mean > un->gap_mean;
    ++configs;
    separated += sep ? 1 : 0;
    detail += fmt("n=%zu naive %.4f vs unsupervised %.4f, 0.5*error %.4f; ", n, nv->gap_mean, un->gap_mean, 0.5 * err);
  }
  const double frac = static_cast<double>(separated) / static_cast<double>(configs);
  return {beats && frac >= 0.8, detail + fmt("separated in %zu/%zu configurations", separated, configs)};
}

Verdict criterion5() {
  const auto& s = gap_study();
  const std::vector<std::size_t> ns{100, 500, 2000};
  bool ok = true;
  std::string detail;
  for (auto m : {ucp::Method::supervised, ucp::Method::unsupervised}) {
    std::vector<const ucp::MethodSummary*> pts;
    for (auto n : ns) pts.push_back(find_summary(results_for(s, n), n, m));
    if (std::find(pts.begin(), pts.end(), nullptr) != pts.end()) return {false, "missing summaries"};
    int inversions = 0;
    bool within = true;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const double rise = pts[k]->gap_mean - pts[k - 1]->gap_mean;
      if (rise > 0.0) {
        ++inversions;
        const double se = std::hypot(pts[k]->gap_stderr, pts[k - 1]->gap_stderr);
        within = within && rise <= se;
      }
    }
    const bool mok = inversions == 0 || (inversions == 1 && within);
    ok = ok && mok;
    detail += fmt("%s gaps %.4f, %.4f, %.4f (%d inversions); ", std::string(ucp::to_string(m)).c_str(),
                  pts[0]->gap_mean, pts[1]->gap_mean, pts[2]->gap_mean, inversions);
  }
  return {ok, detail + "n = 100, 500, 2000"};
}

Verdict criterion6() {
  ucp::Rng rng(606);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u01;
  ucp::SolverOptions opts;
  opts.rel_tol = 1e-13;
  opts.max_iters = 200000;
  double worst_gap = 0.0, worst_sum = 0.0, worst_slack = 0.0, worst_grid = 0.0;
  bool nonneg = true;
  int grid_checked = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const int c = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 6);
    ucp::Matrix cal(n, 2), train(m, 2);
    for (Eigen::Index k = 0; k < cal.size(); ++k) cal.data()[k] = g(rng);
    for (Eigen::Index k = 0; k < train.size(); ++k) train.data()[k] = g(rng);
    std::vector<ucp::Label> y(m);
    for (auto& v : y) v = static_cast<ucp::Label>(rng() % static_cast<unsigned>(c));
    const auto ctx = ucp::build_context(cal, train, y, c, {0.3 + 1.5 * u01(rng)});

    ucp::testing::QpInstance qp;
    qp.gram = Eigen::MatrixXd(ctx.gram);
    qp.c = c;
    qp.lin = -(2.0 / m) * ctx.v;
    std::optional<ucp::ConstraintSet> cs;
    if (inst % 2 == 1 && c > 1) {
      ucp::Vector B(n * c);
      for (auto& v : B) v = 3.0 * u01(rng);
      double lo = 0, hi = 0;
      for (int i = 0; i < n; ++i) {
        lo += B.segment(i * c, c).minCoeff();
        hi += B.segment(i * c, c).maxCoeff();
      }
      cs = ucp::ConstraintSet{B, lo + (0.05 + 0.6 * u01(rng)) * (hi - lo)};
      qp.ineq = B;
      qp.bound = cs->b;
    }
    const auto sol = ucp::solve_label_weights(ctx, cs, opts);
    const auto best = ucp::testing::qp_face_enumeration(qp);
    worst_gap = std::max(worst_gap, std::abs(sol.report.objective_value - best.value));
    if (n * (c - 1) <= 2) {
      const auto grid = ucp::testing::qp_grid_search(qp, 1e-3);
      worst_grid = std::max(worst_grid, std::abs(grid.value - best.value));
      ++grid_checked;
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < c; ++k) {
        nonneg = nonneg && sol.weights(static_cast<std::size_t>(i), k) >= 0.0;
        s += sol.weights(static_cast<std::size_t>(i), k);
      }
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    }
    if (cs) worst_slack = std::min(worst_slack, sol.report.inequality_slack / cs->b);
  }
  const bool ok = worst_gap <= 1e-6 && nonneg && worst_sum <= 1e-12 && worst_slack >= -1e-8 && worst_grid <= 1e-6;
  return {ok, fmt("max |solver - oracle| %.2e (limit 1e-6); oracle vs refined grid %.2e on %d instances; max |block "
                  "sum - 1| %.1e, nonnegative: %s; min slack/b %.2e (limit -1e-8)",
                  worst_gap, worst_grid, grid_checked, worst_sum, nonneg ? "yes" : "no", worst_slack)};
}

Verdict criterion7() {
  ucp::Rng rng(707);
  std::normal_distribution<double> g;
  std::exponential_distribution<double> e;
  double worst = 0.0, excess = -std::numeric_limits<double>::infinity();
  for (int f = 0; f < 20; ++f) {
    const int n = 2 + f % 6, m = 1 + f % 5, c = 2 + f % 3;
    ucp::Matrix cal(n, 3), train(m, 3);
    for (Eigen::Index k = 0; k < cal.size(); ++k) cal.data()[k] = g(rng);
    for (Eigen::Index k = 0; k < train.size(); ++k) train.data()[k] = g(rng);
    std::vector<ucp::Label> y(m);
    for (auto& v : y) v = static_cast<ucp::Label>(rng() % static_cast<unsigned>(c));
    const auto ctx = ucp::build_context(cal, train, y, c, {0.5 + 0.2 * f});
    ucp::LabelWeights w(static_cast<std::size_t>(n), c);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      double s = 0.0;
      for (int k = 0; k < c; ++k) s += (w(i, k) = e(rng));
      for (int k = 0; k < c; ++k) w(i, k) /= s;
    }
    const auto rep = ucp::dual_witness_check(w, ctx, 500, ucp::derive_seed(708, {static_cast<std::uint64_t>(f)}));
    worst = std::max(worst, std::abs(rep.witness_probe - rep.objective));
    excess = std::max(excess, rep.best_probe - rep.objective);
  }
  return {worst <= 1e-8 && excess <= 1e-10,
          fmt("max |witness - objective| %.2e (limit 1e-8); max random probe - objective %.2e (must be <= 1e-10)", worst,
              excess)};
}

Verdict criterion8() {
  // Direct: one-hot true weights through the weighted quantile.
  ucp::Rng rng(808);
  std::uniform_real_distribution<double> u01;
  std::size_t mismatches = 0, checks = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 5 + t, c = 2 + t % 5;
    ucp::Matrix probs(n, c);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < c; ++k) probs(i, k) = u01(rng) + 1e-3;
      probs.row(i) /= probs.row(i).sum();
    }
    const auto scores = ucp::build_score_matrix(probs, ucp::ScoreKind::adaptive, rng());
    std::vector<ucp::Label> y(n);
    for (auto& v : y) v = static_cast<ucp::Label>(rng() % static_cast<unsigned>(c));
    for (double alpha : {0.05, 0.1, 0.2}) {
      const auto a = ucp::conformal_quantile_weighted(scores, ucp::supervised_weights(y, c), alpha);
      const auto b = ucp::conformal_quantile_supervised(ucp::scores_at_labels(scores, y), alpha);
      ++checks;
      if (!(a.q_hat == b.q_hat && a.infinite == b.infinite) ||
          ucp::prediction_sets(scores, a.q_hat) != ucp::prediction_sets(scores, b.q_hat))
        ++mismatches;
    }
  }
  // Pipeline: the unsupervised path fed the true weights.
  auto cfg = base_config();
  cfg.train_size = 500;
  cfg.test_size = 1000;
  cfg.cal_sizes = {50, 200};
  cfg.trials = 10;
  cfg.seed = 809;
  cfg.force_supervised_weights = true;
  const auto res = ucp::run_experiment(cfg);
  std::size_t pipeline_mismatch = res.failed;
  for (const auto& rec : res.records) {
    const auto* s = rec.outcome(ucp::Method::supervised);
    const auto* u = rec.outcome(ucp::Method::unsupervised);
    if (!s || !u || s->q_hat != u->q_hat || s->coverage != u->coverage || s->mean_size != u->mean_size)
      ++pipeline_mismatch;
  }
  return {mismatches == 0 && pipeline_mismatch == 0,
          fmt("%zu/%zu direct quantile mismatches; %zu/%zu pipeline units differ", mismatches, checks,
              pipeline_mismatch, res.records.size())};
}

Verdict criterion9() {
  // Documented monotonicity of the kernel gap bound.
  bool monotone = true;
  ucp::Rng rng(909);
  std::uniform_real_distribution<double> u01;
  for (int t = 0; t < 500; ++t) {
    ucp::BoundInputs in;
    in.n = 10 + 5000 * u01(rng);
    in.m = 10 + 5000 * u01(rng);
    in.delta = 0.01 + 0.9 * u01(rng);
    in.rkhs_norm = 20 * u01(rng) + 1e-3;
    in.approx_error = u01(rng);
    in.num_candidates = 1 + static_cast<int>(rng() % 10);
    const double g = ucp::excess_gap_kernel(in);
    auto with = [&](auto edit) {
      auto c = in;
      edit(c);
      return ucp::excess_gap_kernel(c);
    };
    monotone = monotone && with([](auto& c) { c.n *= 1.3; }) < g && with([](auto& c) { c.m *= 1.3; }) < g &&
               with([](auto& c) { c.rkhs_norm *= 1.3; }) > g && with([](auto& c) { c.approx_error += 0.01; }) > g &&
               with([](auto& c) { c.delta *= 0.7; }) > g;
  }
  // Calibration of the |E| bound across the shared synthetic trials.
  const auto& s = gap_study();
  std::size_t trials = 0, above = 0;
  double max_ratio = 0.0;
  for (const auto* r : {&s.small, &s.large})
    for (const auto& rec : r->records) {
      if (!rec.ok || !rec.unsupervised) continue;
      const auto* u = rec.outcome(ucp::Method::unsupervised);
      ++trials;
      const double e = std::abs(u->diagnostic_E);
      max_ratio = std::max(max_ratio, e / rec.unsupervised->diagnostic_bound);
      if (e > rec.unsupervised->diagnostic_bound) ++above;
    }
  const double frac = trials ? static_cast<double>(above) / static_cast<double>(trials) : 1.0;
  const double limit = 0.1 + 3.0 * std::sqrt(0.1 * 0.9 / static_cast<double>(std::max<std::size_t>(trials, 1)));
  return {monotone && trials >= 200 && frac <= limit,
          fmt("bound monotone: %s; |E| above bound in %zu/%zu trials (%.4f, limit %.4f); max |E|/bound %.3f",
              monotone ? "yes" : "no", above, trials, frac, limit, max_ratio)};
}

Verdict criterion10() {
  std::string detail;
  bool ok = true;
  for (auto [n, limit] : {std::pair<std::size_t, double>{1000, 120.0}, {3000, 900.0}}) {
    ucp::ExperimentConfig cfg;
    cfg.synthetic = ten_class_mixture();
    cfg.train_size = n;
    cfg.validation_size = 300;
    cfg.test_size = 1000;
    cfg.cal_sizes = {n};
    cfg.trials = 1;
    cfg.seed = 1010;
    cfg.methods = {ucp::Method::unsupervised};
    const auto t0 = Clock::now();
    const auto rec = ucp::run_trial(cfg, 0, n);
    const double secs = seconds_since(t0);
    ok = ok && secs <= limit;
    detail += fmt("n=%zu c=10: %.1f s (limit %.0f s, solver %d iterations%s); ", n, secs, limit,
                  rec.unsupervised->solver.iterations, rec.unsupervised->solver.converged ? "" : ", not converged");
  }
  return {ok, detail + "single thread, includes classifier training"};
}

Verdict criterion11() {
  ucp::Rng rng(1111);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const int n = 5 + inst, d = 1 + inst % 4, c = 2 + inst % 3;
    ucp::Matrix x(n, d);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = g(rng);
    std::vector<ucp::Label> y(n);
    for (int i = 0; i < n; ++i) y[i] = static_cast<ucp::Label>(i % c);
    const ucp::Dataset data(x, y, c);
    ucp::Matrix w(c, d + 1);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = g(rng);
    const double l2 = 0.01 * (inst + 1);
    ucp::Matrix grad;
    (void)ucp::logistic_objective(w, data, l2, &grad);
    const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
    const auto fd = ucp::testing::central_difference(
        [&](const Eigen::VectorXd& v) {
          return ucp::logistic_objective(Eigen::Map<const ucp::Matrix>(v.data(), c, d + 1), data, l2);
        },
        flat, 1e-5);
    const Eigen::VectorXd an = Eigen::Map<const Eigen::VectorXd>(grad.data(), grad.size());
    worst = std::max(worst, (an - fd).norm() / std::max(an.norm(), 1e-12));
  }
  return {worst <= 1e-5, fmt("max relative gradient error %.2e over 10 instances (limit 1e-5)", worst)};
}

// Not a criterion: coverage of the exact min-norm interpolation selection.
void interpolation_rule_info() {
  auto cfg = base_config();
  cfg.trials = 10;
  cfg.seed = 4242;
  cfg.cal_sizes = {500};
  cfg.methods = {ucp::Method::unsupervised};
  cfg.selection = ucp::SelectionRule::interpolation;
  const auto t0 = Clock::now();
  const auto res = ucp::run_experiment(cfg);
  const auto* s = find_summary(res, 500, ucp::Method::unsupervised);
  std::map<std::size_t, int> picks;
  for (const auto& r : res.records)
    if (r.ok) ++picks[r.unsupervised->sigma_index];
  std::string hist;
  for (auto [k, v] : picks) hist += fmt(" %zu:%d", k, v);
  std::printf("info: interpolation selection rule at n=m=500: mean coverage %.4f over %zu trials, sigma index "
              "counts%s, %.0f s\n",
              s ? s->coverage_mean : std::nan(""), s ? s->count : 0, hist.c_str(), seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10, criterion11};
  std::set<int> selected;
  bool info = false;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--info") {
      info = true;
      continue;
    }
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [--info] [criterion numbers 1-%zu]\n", argv[0], criteria.size());
      return 64;
    }
    selected.insert(k);
  }
  if (selected.empty())
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.insert(k);

  int failed = 0;
  for (int k : selected) {
    Verdict v;
    try {
      v = criteria[k - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("criterion %d: %s %s\n", k, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  if (info) interpolation_rule_info();
  std::printf("%zu criteria, %d failed\n", selected.size(), failed);
  return failed == 0 ? 0 : 1;
}
