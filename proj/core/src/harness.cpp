#include "ucp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ucp/bounds.hpp"
#include "ucp/error.hpp"
#include "ucp/rng.hpp"

namespace ucp {

using json = nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  require(obj.is_object(), where + " must be an object");
  for (const auto& [key, _] : obj.items())
    require(std::find(allowed.begin(), allowed.end(), key) != allowed.end(), "unknown key '" + key + "' in " + where);
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_number(), std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_number_unsigned() || (obj[key].is_number_integer() && obj[key].get<long long>() >= 0),
          std::string("'") + key + "' must be a nonnegative integer");
  return obj[key].get<std::size_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj[key].is_boolean(), std::string("'") + key + "' must be true or false");
  return obj[key].get<bool>();
}

std::vector<double> get_vector(const json& v, const std::string& what) {
  require(v.is_array(), what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    require(e.is_number(), what + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

SyntheticConfig parse_synthetic(const json& d) {
  check_keys(d, {"type", "means", "covariance_scale", "priors"}, "dataset");
  SyntheticConfig s;
  require(d.contains("means") && d["means"].is_array(), "synthetic dataset needs 'means'");
  for (const auto& row : d["means"]) s.means.push_back(get_vector(row, "each mean"));
  s.covariance_scale = get_number(d, "covariance_scale", 1.0);
  if (d.contains("priors"))
    s.priors = get_vector(d["priors"], "'priors'");
  else
    s.priors.assign(s.means.size(), 1.0 / static_cast<double>(std::max<std::size_t>(s.means.size(), 1)));
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("synthetic dataset: ") + e.what());
  }
  return s;
}

Dataset load_pool(const ExperimentConfig& cfg) {
  return load_csv_dataset(cfg.csv->path, true, cfg.csv->num_classes);
}

// Pool of labeled samples for one unit, in train | validation | calibration | test order.
Dataset draw_pool(const ExperimentConfig& cfg, const Dataset* csv_pool, std::size_t total, std::uint64_t seed) {
  if (cfg.synthetic) return generate_synthetic(*cfg.synthetic, static_cast<long>(total), seed).data;
  if (total > csv_pool->size())
    throw SizeError("split needs " + std::to_string(total) + " rows but the dataset has " +
                    std::to_string(csv_pool->size()));
  const auto idx = random_indices(csv_pool->size(), total, seed);
  return csv_pool->subset(idx);
}

Dataset slice(const Dataset& pool, std::size_t begin, std::size_t count) {
  std::vector<std::size_t> idx(count);
  for (std::size_t k = 0; k < count; ++k) idx[k] = begin + k;
  return pool.subset(idx);
}

TrialRecord run_unit(const ExperimentConfig& cfg, const Dataset* csv_pool, std::size_t trial_index, std::size_t n) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.trial = trial_index;
  rec.n = n;
  rec.m = cfg.m_for(n);
  rec.seed = trial_seed(cfg.seed, trial_index, n);

  const std::size_t total = cfg.train_size + cfg.validation_size + n + cfg.test_size;
  const Dataset pool = draw_pool(cfg, csv_pool, total, derive_seed(rec.seed, {1}));
  const Dataset train = slice(pool, 0, cfg.train_size);
  const Dataset validation = slice(pool, cfg.train_size, cfg.validation_size);
  const CalibrationSet cal(slice(pool, cfg.train_size + cfg.validation_size, n));
  const Dataset test = slice(pool, cfg.train_size + cfg.validation_size + n, cfg.test_size);
  const int c = pool.num_classes();

  TrainOptions topts = cfg.training;
  topts.l2 = cfg.l2;
  const ProbModel model = train_logistic(train, topts);
  rec.classifier_error = misclassification_rate(model, test);

  const Matrix cal_probs = model.predict_proba(cal.instances());
  const ScoreMatrix cal_scores = build_score_matrix(cal_probs, cfg.score, derive_seed(rec.seed, {2}), cfg.noise_epsilon);
  const ScoreMatrix test_scores =
      build_score_matrix(model.predict_proba(test.instances()), cfg.score, derive_seed(rec.seed, {3}), cfg.noise_epsilon);
  const auto true_labels = Evaluator::true_labels(cal);

  auto assess = [&](Method method, double q_hat, const LabelWeights& w) {
    MethodOutcome out;
    out.method = method;
    out.q_hat = q_hat;
    const auto sets = prediction_sets(test_scores, q_hat);
    const auto metrics = evaluate(sets, test.labels());
    out.coverage = metrics.coverage;
    out.mean_size = metrics.mean_size;
    out.diagnostic_E = coverage_diagnostic_E(w, cal_scores, q_hat, true_labels);
    return out;
  };

  for (Method method : cfg.methods) {
    switch (method) {
      case Method::supervised: {
        const auto s = scores_at_labels(cal_scores, true_labels);
        const double q = conformal_quantile_supervised(s, cfg.alpha).q_hat;
        rec.outcomes.push_back(assess(method, q, supervised_weights(true_labels, c)));
        break;
      }
      case Method::naive: {
        const auto w = naive_weights(cal_probs);
        const double q = conformal_quantile_weighted(cal_scores, w, cfg.alpha, method).q_hat;
        rec.outcomes.push_back(assess(method, q, w));
        break;
      }
      case Method::unsupervised: {
        if (cfg.force_supervised_weights) {
          const auto w = supervised_weights(true_labels, c);
          const double q = conformal_quantile_weighted(cal_scores, w, cfg.alpha, method).q_hat;
          rec.outcomes.push_back(assess(method, q, w));
          break;
        }
        UnsupervisedDetails det;
        const auto naive = naive_weights(cal_probs);
        const auto grid = cfg.sigma0_grid.empty() ? default_bandwidth_grid(pool.num_features())
                                                  : bandwidth_grid(pool.num_features(), cfg.sigma0_grid);
        KernelSelection sel;
        if (cfg.selection == SelectionRule::approximation) {
          ApproximationSelectionOptions so = cfg.approximation;
          so.seed = derive_seed(rec.seed, {5});
          sel = select_kernel_approx(grid, cal.instances(), cal_scores, naive, cfg.alpha, so);
        } else {
          sel = select_kernel(grid, cal.instances(), cal_scores, naive, cfg.alpha, cfg.interpolation);
        }
        det.sigma = sel.best.sigma;
        det.sigma_index = sel.best_index;
        det.q0 = sel.q0;
        det.selection_statistic = sel.candidates[sel.best_index].statistic;
        det.selection_lambda = sel.candidates[sel.best_index].lambda;

        const auto m_idx = random_indices(train.size(), rec.m, derive_seed(rec.seed, {4}));
        const Dataset mset = train.subset(m_idx);
        const KernelContext ctx = build_context(cal.instances(), mset.instances(), mset.labels(), c, sel.best);

        std::optional<ConstraintSet> cons;
        if (cfg.loss_constraint) {
          const LossBound lb = estimate_loss_bound(model, cfg.validation_size > 0 ? validation : train);
          det.loss_bound = lb.L;
          det.loss_bound_floored = lb.floored;
          cons = cross_entropy_constraint(cal_probs, lb.L);
          det.constrained = true;
        }
        auto sol = solve_label_weights(ctx, cons, cfg.solver, &naive);
        const double q = conformal_quantile_weighted(cal_scores, sol.weights, cfg.alpha, method).q_hat;
        rec.outcomes.push_back(assess(method, q, sol.weights));

        det.solver = std::move(sol.report);
        det.mmd = mmd_objective(sol.weights, ctx);
        const Vector u_final = coverage_indicator(cal_scores, q);
        if (cfg.selection == SelectionRule::approximation) {
          const auto a = ridge_approximation(ctx.gram, c, u_final, det.selection_lambda, cfg.interpolation);
          det.rkhs_norm = std::sqrt(a.norm_sq);
          det.approx_error = a.approx_error;
          det.approx_surrogate = !a.feasible;
        } else {
          const auto interp = min_norm_interpolation(ctx.gram, c, u_final, cfg.interpolation);
          det.rkhs_norm = std::sqrt(std::max(0.0, interp.min_norm_sq));
          if (interp.status != InterpolationStatus::converged) {
            det.approx_error = interp.residual / std::sqrt(static_cast<double>(n));
            det.approx_surrogate = true;
          }
        }
        BoundInputs bi;
        bi.n = static_cast<double>(n);
        bi.m = static_cast<double>(rec.m);
        bi.alpha = cfg.alpha;
        bi.delta = cfg.delta;
        bi.kappa = ctx.kappa;
        bi.rkhs_norm = det.rkhs_norm;
        bi.approx_error = det.approx_error;
        bi.v_opt = det.mmd;
        bi.num_candidates = static_cast<int>(grid.size());
        det.gap_bound = excess_gap_kernel(bi, cfg.union_bound);
        det.diagnostic_bound = coverage_error_bound_kernel(bi);
        det.objective_bound = objective_value_bound(ctx.kappa, 1.0, bi.n, bi.m, cfg.delta, 0.0);
        rec.unsupervised = std::move(det);
        break;
      }
    }
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(synthetic.has_value() != csv.has_value(), "exactly one dataset source is required");
  require(trials >= 1, "trials must be at least 1");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(!cal_sizes.empty(), "at least one calibration size is required");
  for (auto n : cal_sizes) require(n >= 1, "calibration size n must be at least 1");
  require(!m || *m >= 1, "m must be at least 1");
  require(train_size >= 2, "train_size must be at least 2");
  require(test_size >= 1, "test_size must be at least 1");
  require(!methods.empty(), "at least one method is required");
  require(noise_epsilon >= 0.0, "noise_epsilon must be nonnegative");
  require(l2 >= 0.0, "l2 must be nonnegative");
  require(workers >= 1, "workers must be at least 1");
  for (double s : sigma0_grid) require(s > 0.0 && std::isfinite(s), "sigma0 grid entries must be positive");
  require(approximation.relative_error > 0.0 && approximation.relative_error < 1.0,
          "selection.relative_error must lie in (0, 1)");
  if (std::find(methods.begin(), methods.end(), Method::unsupervised) != methods.end())
    for (auto n : cal_sizes) require(m_for(n) <= train_size, "m exceeds train_size");
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j,
             {"dataset", "train_size", "validation_size", "n", "m", "test_size", "alpha", "delta", "score",
              "sigma0_grid", "selection", "union_bound", "loss_constraint", "noise_epsilon", "l2", "trials", "seed", "methods",
              "workers", "out", "solver", "interpolation", "training"},
             "config");
  ExperimentConfig cfg;
  try {
    require(j.contains("dataset"), "'dataset' is required");
    const auto& d = j["dataset"];
    require(d.is_object() && d.contains("type") && d["type"].is_string(), "dataset needs a 'type'");
    const auto type = d["type"].get<std::string>();
    if (type == "synthetic") {
      cfg.synthetic = parse_synthetic(d);
    } else if (type == "csv") {
      check_keys(d, {"type", "path", "num_classes"}, "dataset");
      require(d.contains("path") && d["path"].is_string(), "csv dataset needs a 'path'");
      CsvSource src;
      src.path = d["path"].get<std::string>();
      if (src.path.is_relative() && !base_dir.empty()) src.path = base_dir / src.path;
      if (d.contains("num_classes")) src.num_classes = static_cast<int>(get_count(d, "num_classes", 0));
      cfg.csv = src;
    } else {
      throw ConfigError("unknown dataset type '" + type + "'");
    }

    cfg.train_size = get_count(j, "train_size", cfg.train_size);
    cfg.validation_size = get_count(j, "validation_size", cfg.validation_size);
    if (j.contains("n")) {
      cfg.cal_sizes.clear();
      if (j["n"].is_array()) {
        for (const auto& v : j["n"]) {
          require(v.is_number_unsigned(), "'n' entries must be positive integers");
          cfg.cal_sizes.push_back(v.get<std::size_t>());
        }
      } else {
        cfg.cal_sizes.push_back(get_count(j, "n", 0));
      }
    }
    if (j.contains("m") && !j["m"].is_null()) cfg.m = get_count(j, "m", 0);
    cfg.test_size = get_count(j, "test_size", cfg.test_size);
    cfg.alpha = get_number(j, "alpha", cfg.alpha);
    cfg.delta = get_number(j, "delta", cfg.delta);
    if (j.contains("score")) {
      require(j["score"].is_string(), "'score' must be a string");
      cfg.score = score_kind_from_string(j["score"].get<std::string>());
    }
    if (j.contains("sigma0_grid")) cfg.sigma0_grid = get_vector(j["sigma0_grid"], "'sigma0_grid'");
    cfg.union_bound = get_bool(j, "union_bound", cfg.union_bound);
    cfg.loss_constraint = get_bool(j, "loss_constraint", cfg.loss_constraint);
    cfg.noise_epsilon = get_number(j, "noise_epsilon", cfg.noise_epsilon);
    cfg.l2 = get_number(j, "l2", cfg.l2);
    cfg.trials = get_count(j, "trials", cfg.trials);
    cfg.seed = get_count(j, "seed", cfg.seed);
    if (j.contains("methods")) {
      require(j["methods"].is_array(), "'methods' must be an array");
      cfg.methods.clear();
      for (const auto& v : j["methods"]) {
        require(v.is_string(), "'methods' entries must be strings");
        const Method mth = method_from_string(v.get<std::string>());
        require(std::find(cfg.methods.begin(), cfg.methods.end(), mth) == cfg.methods.end(), "duplicate method");
        cfg.methods.push_back(mth);
      }
    }
    cfg.workers = static_cast<unsigned>(get_count(j, "workers", cfg.workers));
    if (j.contains("out")) {
      require(j["out"].is_string(), "'out' must be a string");
      cfg.out_dir = j["out"].get<std::string>();
    }
    if (j.contains("selection")) {
      const auto& s = j["selection"];
      check_keys(s, {"rule", "relative_error", "max_instances"}, "selection");
      if (s.contains("rule")) {
        require(s["rule"].is_string(), "'selection.rule' must be a string");
        cfg.selection = selection_rule_from_string(s["rule"].get<std::string>());
      }
      cfg.approximation.relative_error = get_number(s, "relative_error", cfg.approximation.relative_error);
      cfg.approximation.max_instances = get_count(s, "max_instances", cfg.approximation.max_instances);
    }
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      check_keys(s, {"max_iters", "rel_tol", "dual_tol", "max_bisections"}, "solver");
      cfg.solver.max_iters = static_cast<int>(get_count(s, "max_iters", cfg.solver.max_iters));
      cfg.solver.rel_tol = get_number(s, "rel_tol", cfg.solver.rel_tol);
      cfg.solver.dual_tol = get_number(s, "dual_tol", cfg.solver.dual_tol);
      cfg.solver.max_bisections = static_cast<int>(get_count(s, "max_bisections", cfg.solver.max_bisections));
    }
    if (j.contains("interpolation")) {
      const auto& s = j["interpolation"];
      check_keys(s, {"tol", "max_iters", "jitter_scale"}, "interpolation");
      cfg.interpolation.tol = get_number(s, "tol", cfg.interpolation.tol);
      cfg.interpolation.max_iters = static_cast<int>(get_count(s, "max_iters", cfg.interpolation.max_iters));
      cfg.interpolation.jitter_scale = get_number(s, "jitter_scale", cfg.interpolation.jitter_scale);
    }
    if (j.contains("training")) {
      const auto& s = j["training"];
      check_keys(s, {"max_iters", "tol"}, "training");
      cfg.training.max_iters = static_cast<int>(get_count(s, "max_iters", cfg.training.max_iters));
      cfg.training.tol = get_number(s, "tol", cfg.training.tol);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.synthetic) {
    j["dataset"] = {{"type", "synthetic"},
                    {"means", cfg.synthetic->means},
                    {"covariance_scale", cfg.synthetic->covariance_scale},
                    {"priors", cfg.synthetic->priors}};
  } else if (cfg.csv) {
    j["dataset"] = {{"type", "csv"}, {"path", cfg.csv->path.string()}};
    if (cfg.csv->num_classes) j["dataset"]["num_classes"] = *cfg.csv->num_classes;
  }
  j["train_size"] = cfg.train_size;
  j["validation_size"] = cfg.validation_size;
  j["n"] = cfg.cal_sizes;
  j["m"] = cfg.m ? json(*cfg.m) : json(nullptr);
  j["test_size"] = cfg.test_size;
  j["alpha"] = cfg.alpha;
  j["delta"] = cfg.delta;
  j["score"] = std::string(to_string(cfg.score));
  j["sigma0_grid"] = cfg.sigma0_grid;
  j["selection"] = {{"rule", std::string(to_string(cfg.selection))},
                    {"relative_error", cfg.approximation.relative_error},
                    {"max_instances", cfg.approximation.max_instances}};
  j["union_bound"] = cfg.union_bound;
  j["loss_constraint"] = cfg.loss_constraint;
  j["noise_epsilon"] = cfg.noise_epsilon;
  j["l2"] = cfg.l2;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  json methods = json::array();
  for (auto m : cfg.methods) methods.push_back(std::string(to_string(m)));
  j["methods"] = methods;
  j["solver"] = {{"max_iters", cfg.solver.max_iters},
                 {"rel_tol", cfg.solver.rel_tol},
                 {"dual_tol", cfg.solver.dual_tol},
                 {"max_bisections", cfg.solver.max_bisections}};
  j["interpolation"] = {{"tol", cfg.interpolation.tol},
                        {"max_iters", cfg.interpolation.max_iters},
                        {"jitter_scale", cfg.interpolation.jitter_scale}};
  j["training"] = {{"max_iters", cfg.training.max_iters}, {"tol", cfg.training.tol}};
  return j.dump();
}

std::string_view to_string(SelectionRule rule) noexcept {
  return rule == SelectionRule::approximation ? "approximation" : "interpolation";
}

SelectionRule selection_rule_from_string(std::string_view name) {
  if (name == "approximation") return SelectionRule::approximation;
  if (name == "interpolation") return SelectionRule::interpolation;
  throw ConfigError("unknown selection rule '" + std::string(name) + "'");
}

const MethodOutcome* TrialRecord::outcome(Method m) const {
  for (const auto& o : outcomes)
    if (o.method == m) return &o;
  return nullptr;
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t trial, std::size_t n) {
  return derive_seed(base, {static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(n)});
}

TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t trial_index, std::size_t n) {
  std::optional<Dataset> pool;
  if (cfg.csv) pool = load_pool(cfg);
  try {
    return run_unit(cfg, pool ? &*pool : nullptr, trial_index, n);
  } catch (const std::exception& e) {
    throw Error("trial " + std::to_string(trial_index) + " (n=" + std::to_string(n) + "): " + e.what());
  }
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw EmptyInputError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::vector<MethodSummary> aggregate(const std::vector<TrialRecord>& records, double alpha,
                                     const std::vector<Method>& methods) {
  std::vector<const TrialRecord*> sorted;
  for (const auto& r : records)
    if (r.ok) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const TrialRecord* a, const TrialRecord* b) {
    return a->n != b->n ? a->n < b->n : a->trial < b->trial;
  });
  std::vector<std::size_t> sizes;
  for (const auto* r : sorted)
    if (sizes.empty() || sizes.back() != r->n) sizes.push_back(r->n);

  std::vector<MethodSummary> out;
  for (std::size_t n : sizes) {
    for (Method m : methods) {
      std::vector<double> cov, size, gap;
      for (const auto* r : sorted) {
        if (r->n != n) continue;
        if (const auto* o = r->outcome(m)) {
          cov.push_back(o->coverage);
          size.push_back(o->mean_size);
          gap.push_back(std::abs(1.0 - alpha - o->coverage));
        }
      }
      if (cov.empty()) continue;
      MethodSummary s;
      s.n = n;
      s.method = m;
      s.count = cov.size();
      auto mean = [](const std::vector<double>& v) {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc / static_cast<double>(v.size());
      };
      s.coverage_mean = mean(cov);
      s.coverage_p25 = percentile(cov, 0.25);
      s.coverage_p75 = percentile(cov, 0.75);
      s.size_mean = mean(size);
      s.size_p25 = percentile(size, 0.25);
      s.size_p75 = percentile(size, 0.75);
      s.gap_mean = mean(gap);
      s.gap_p25 = percentile(gap, 0.25);
      s.gap_p75 = percentile(gap, 0.75);
      if (gap.size() > 1) {
        double ss = 0.0;
        for (double g : gap) ss += (g - s.gap_mean) * (g - s.gap_mean);
        s.gap_stderr = std::sqrt(ss / static_cast<double>(gap.size() - 1) / static_cast<double>(gap.size()));
      }
      out.push_back(s);
    }
  }
  return out;
}

std::optional<unsigned> env_worker_count() {
  if (const char* env = std::getenv("UCP_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::nullopt;
}

ExperimentResults run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<Dataset> pool;
  if (cfg.csv) pool = load_pool(cfg);

  struct Unit {
    std::size_t trial, n;
  };
  std::vector<Unit> units;
  for (std::size_t n : cfg.cal_sizes)
    for (std::size_t t = 0; t < cfg.trials; ++t) units.push_back({t, n});

  ExperimentResults res;
  res.config = cfg;
  res.records.resize(units.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < units.size(); k = next++) {
      const auto [t, n] = units[k];
      try {
        res.records[k] = run_unit(cfg, pool ? &*pool : nullptr, t, n);
      } catch (const std::exception& e) {
        TrialRecord failed;
        failed.trial = t;
        failed.n = n;
        failed.m = cfg.m_for(n);
        failed.seed = trial_seed(cfg.seed, t, n);
        failed.ok = false;
        failed.error = "trial " + std::to_string(t) + " (n=" + std::to_string(n) + "): " + e.what();
        res.records[k] = std::move(failed);
      }
    }
  };
  const unsigned workers = std::min<std::size_t>(cfg.workers, std::max<std::size_t>(units.size(), 1));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool_threads;
    for (unsigned w = 0; w < workers; ++w) pool_threads.emplace_back(work);
    for (auto& th : pool_threads) th.join();
  }

  std::stable_sort(res.records.begin(), res.records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return a.n != b.n ? a.n < b.n : a.trial < b.trial;
  });
  double err = 0.0;
  std::size_t ok = 0;
  for (const auto& r : res.records) {
    if (!r.ok) {
      ++res.failed;
      continue;
    }
    err += r.classifier_error;
    ++ok;
  }
  res.classifier_error_mean = ok ? err / static_cast<double>(ok) : 0.0;
  res.summaries = aggregate(res.records, cfg.alpha, cfg.methods);
  return res;
}

}  // namespace ucp
