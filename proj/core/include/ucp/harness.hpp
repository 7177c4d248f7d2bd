#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ucp/classifier.hpp"
#include "ucp/data.hpp"
#include "ucp/kernel.hpp"
#include "ucp/quantile.hpp"
#include "ucp/scores.hpp"
#include "ucp/weights.hpp"

namespace ucp {

struct CsvSource {
  std::filesystem::path path;
  std::optional<int> num_classes;
};

enum class SelectionRule { approximation, interpolation };

std::string_view to_string(SelectionRule rule) noexcept;
SelectionRule selection_rule_from_string(std::string_view name);

struct ExperimentConfig {
  // Exactly one source is set.
  std::optional<SyntheticConfig> synthetic;
  std::optional<CsvSource> csv;

  std::size_t train_size = 1000;      // samples the classifier is fit on
  std::size_t validation_size = 200;  // held out for the loss bound L
  std::vector<std::size_t> cal_sizes{500};  // n; one gap-curve point per entry
  std::optional<std::size_t> m;       // training pairs in the MMD; defaults to n
  std::size_t test_size = 1000;

  double alpha = 0.1;
  double delta = 0.1;
  ScoreKind score = ScoreKind::adaptive;
  std::vector<double> sigma0_grid;  // empty means the default grid
  bool union_bound = true;
  bool loss_constraint = true;
  double noise_epsilon = kDefaultTieNoise;
  double l2 = 1e-3;

  std::size_t trials = 10;
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::supervised, Method::unsupervised, Method::naive};
  unsigned workers = 1;
  std::filesystem::path out_dir = "results";

  SelectionRule selection = SelectionRule::approximation;
  ApproximationSelectionOptions approximation;
  SolverOptions solver;
  InterpolationOptions interpolation;
  TrainOptions training;

  // Replaces the unsupervised weights with the true one-hot weights. Testing aid.
  bool force_supervised_weights = false;

  std::size_t m_for(std::size_t n) const { return m.value_or(n); }
  void validate() const;  // throws ConfigError
};

// Parses the JSON document; any problem is a ConfigError. Relative csv paths
// are resolved against base_dir.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
// Canonical JSON echo of the configuration.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

struct MethodOutcome {
  Method method = Method::supervised;
  double coverage = 0.0;
  double mean_size = 0.0;
  double q_hat = 0.0;
  double diagnostic_E = 0.0;  // against the true calibration labels
};

struct UnsupervisedDetails {
  double sigma = 0.0;
  std::size_t sigma_index = 0;
  double q0 = 0.0;
  double selection_statistic = 0.0;
  double selection_lambda = 0.0;  // ridge parameter; 0 for exact interpolation
  double loss_bound = 0.0;
  bool loss_bound_floored = false;
  bool constrained = false;
  SolverReport solver;
  double mmd = 0.0;             // V_opt
  double rkhs_norm = 0.0;       // R of the approximant of the final indicator
  double approx_error = 0.0;    // D of the same approximant
  bool approx_surrogate = false;  // D is a residual-based stand-in
  double gap_bound = 0.0;       // G^K
  double diagnostic_bound = 0.0;  // bound on |E|
  double objective_bound = 0.0;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double classifier_error = 0.0;
  std::vector<MethodOutcome> outcomes;  // in cfg.methods order
  std::optional<UnsupervisedDetails> unsupervised;
  double seconds = 0.0;  // wall clock; not reproducible

  const MethodOutcome* outcome(Method m) const;
};

// Seed of the unit (trial, n); every random stream of the unit derives from it.
std::uint64_t trial_seed(std::uint64_t base, std::size_t trial, std::size_t n);

// Runs one trial at one calibration size. Throws on failure; the message
// names the trial.
TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t trial_index, std::size_t n);

struct MethodSummary {
  std::size_t n = 0;
  Method method = Method::supervised;
  std::size_t count = 0;
  double coverage_mean = 0.0, coverage_p25 = 0.0, coverage_p75 = 0.0;
  double size_mean = 0.0, size_p25 = 0.0, size_p75 = 0.0;
  double gap_mean = 0.0, gap_p25 = 0.0, gap_p75 = 0.0;
  double gap_stderr = 0.0;
};

struct ExperimentResults {
  ExperimentConfig config;
  std::vector<TrialRecord> records;  // sorted by (n, trial)
  std::vector<MethodSummary> summaries;  // sorted by (n, method)
  std::size_t failed = 0;
  double classifier_error_mean = 0.0;
  bool complete() const noexcept { return failed == 0; }
};

// Linear-interpolation percentile (p in [0, 1]) of the values.
double percentile(std::vector<double> values, double p);

// Deterministic fold over records sorted by (n, trial); failed records are skipped.
std::vector<MethodSummary> aggregate(const std::vector<TrialRecord>& records, double alpha,
                                     const std::vector<Method>& methods);

// Runs every (trial, n) unit on cfg.workers threads. Failures are recorded.
ExperimentResults run_experiment(const ExperimentConfig& cfg);

// Worker count from UCP_WORKERS when it holds a positive integer.
std::optional<unsigned> env_worker_count();

// Writes summary.json, trials.csv, and gapcurve.csv into out_dir.
void emit_results(const ExperimentResults& results, const std::filesystem::path& out_dir);

// Reads trials.csv back; used to check serialization fidelity.
std::vector<TrialRecord> parse_trials_csv(const std::filesystem::path& path);

}  // namespace ucp
