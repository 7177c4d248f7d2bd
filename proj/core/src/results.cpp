#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <Eigen/Core>
#include <json.hpp>

#include "ucp/error.hpp"
#include "ucp/harness.hpp"

namespace ucp {

using json = nlohmann::json;

namespace {

constexpr const char* kColumns[] = {
    "trial", "n", "m", "seed", "ok", "method", "coverage", "mean_size", "q_hat", "diagnostic_E", "classifier_error",
    "sigma", "sigma_index", "q0", "selection_statistic", "selection_lambda", "loss_bound", "loss_bound_floored", "constrained",
    "solver_objective", "solver_iterations", "solver_converged", "solver_slack", "solver_multiplier",
    "solver_bisections", "solver_step_change", "mmd", "rkhs_norm", "approx_error", "approx_surrogate", "gap_bound",
    "diagnostic_bound", "objective_bound", "seconds", "error"};
constexpr std::size_t kNumColumns = std::size(kColumns);

std::string fmt(double v) {
  char buf[41];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '"') ch = ';';
    else if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

std::vector<std::string> row_for(const TrialRecord& r, const MethodOutcome* o) {
  std::vector<std::string> f(kNumColumns);
  f[0] = std::to_string(r.trial);
  f[1] = std::to_string(r.n);
  f[2] = std::to_string(r.m);
  f[3] = std::to_string(r.seed);
  f[4] = r.ok ? "1" : "0";
  f[33] = fmt(r.seconds);
  f[34] = sanitize(r.error);
  if (!o) return f;
  f[5] = std::string(to_string(o->method));
  f[6] = fmt(o->coverage);
  f[7] = fmt(o->mean_size);
  f[8] = fmt(o->q_hat);
  f[9] = fmt(o->diagnostic_E);
  f[10] = fmt(r.classifier_error);
  if (o->method == Method::unsupervised && r.unsupervised) {
    const auto& d = *r.unsupervised;
    f[11] = fmt(d.sigma);
    f[12] = std::to_string(d.sigma_index);
    f[13] = fmt(d.q0);
    f[14] = fmt(d.selection_statistic);
    f[15] = fmt(d.selection_lambda);
    f[16] = fmt(d.loss_bound);
    f[17] = d.loss_bound_floored ? "1" : "0";
    f[18] = d.constrained ? "1" : "0";
    f[19] = fmt(d.solver.objective_value);
    f[20] = std::to_string(d.solver.iterations);
    f[21] = d.solver.converged ? "1" : "0";
    f[22] = fmt(d.solver.inequality_slack);
    f[23] = fmt(d.solver.multiplier);
    f[24] = std::to_string(d.solver.bisections);
    f[25] = fmt(d.solver.final_step_relative_change);
    f[26] = fmt(d.mmd);
    f[27] = fmt(d.rkhs_norm);
    f[28] = fmt(d.approx_error);
    f[29] = d.approx_surrogate ? "1" : "0";
    f[30] = fmt(d.gap_bound);
    f[31] = fmt(d.diagnostic_bound);
    f[32] = fmt(d.objective_bound);
  }
  return f;
}

json stats(double mean, double p25, double p75) { return {{"mean", mean}, {"p25", p25}, {"p75", p75}}; }

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

double parse_double(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ParseError(line, "not a number: '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const auto v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw ParseError(line, "not an integer: '" + s + "'");
  return v;
}

}  // namespace

void emit_results(const ExperimentResults& results, const std::filesystem::path& out_dir) {
  if (results.records.empty()) throw EmptyInputError("refusing to emit results: the trial list is empty");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  std::ostringstream csv;
  for (std::size_t k = 0; k < kNumColumns; ++k) csv << (k ? "," : "") << kColumns[k];
  csv << '\n';
  auto emit_row = [&](const std::vector<std::string>& f) {
    for (std::size_t k = 0; k < f.size(); ++k) csv << (k ? "," : "") << f[k];
    csv << '\n';
  };
  for (const auto& r : results.records) {
    if (!r.ok || r.outcomes.empty()) {
      emit_row(row_for(r, nullptr));
      continue;
    }
    for (const auto& o : r.outcomes) emit_row(row_for(r, &o));
  }
  write_file(out_dir / "trials.csv", csv.str());

  std::ostringstream gap;
  gap << "n,method,count,gap_mean,gap_p25,gap_p75,gap_stderr\n";
  for (const auto& s : results.summaries)
    gap << s.n << ',' << to_string(s.method) << ',' << s.count << ',' << fmt(s.gap_mean) << ',' << fmt(s.gap_p25)
        << ',' << fmt(s.gap_p75) << ',' << fmt(s.gap_stderr) << '\n';
  write_file(out_dir / "gapcurve.csv", gap.str());

  json summary;
  summary["schema_version"] = 1;
  summary["config"] = json::parse(config_to_json(results.config));
  summary["environment"] = {
      {"compiler", __VERSION__},
      {"cxx_standard", static_cast<long>(__cplusplus)},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
#ifdef NDEBUG
      {"assertions", false},
#else
      {"assertions", true},
#endif
      {"hardware_threads", std::thread::hardware_concurrency()},
      {"workers", results.config.workers}};
  json incomplete = json::array();
  for (const auto& r : results.records)
    if (!r.ok) incomplete.push_back({{"trial", r.trial}, {"n", r.n}, {"error", r.error}});
  summary["trials"] = {{"units", results.records.size()},
                       {"completed", results.records.size() - results.failed},
                       {"failed", results.failed},
                       {"complete", results.complete()},
                       {"incomplete", incomplete}};
  summary["classifier_error_mean"] = results.classifier_error_mean;
  json methods = json::array();
  for (const auto& s : results.summaries)
    methods.push_back({{"n", s.n},
                       {"method", std::string(to_string(s.method))},
                       {"count", s.count},
                       {"coverage", stats(s.coverage_mean, s.coverage_p25, s.coverage_p75)},
                       {"set_size", stats(s.size_mean, s.size_p25, s.size_p75)},
                       {"gap", {{"mean", s.gap_mean}, {"p25", s.gap_p25}, {"p75", s.gap_p75}, {"stderr", s.gap_stderr}}}});
  summary["methods"] = methods;
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
}

std::vector<TrialRecord> parse_trials_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw EmptyInputError(path.string() + " is empty");
  std::vector<TrialRecord> out;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> where;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != kNumColumns) throw ParseError(lineno, "expected " + std::to_string(kNumColumns) + " fields");

    const auto key = std::make_pair(static_cast<std::size_t>(parse_uint(f[1], lineno)),
                                    static_cast<std::size_t>(parse_uint(f[0], lineno)));
    auto it = where.find(key);
    if (it == where.end()) {
      TrialRecord r;
      r.trial = key.second;
      r.n = key.first;
      r.m = parse_uint(f[2], lineno);
      r.seed = parse_uint(f[3], lineno);
      r.ok = f[4] == "1";
      r.seconds = parse_double(f[33], lineno);
      r.error = f[34];
      if (!f[10].empty()) r.classifier_error = parse_double(f[10], lineno);
      it = where.emplace(key, out.size()).first;
      out.push_back(std::move(r));
    }
    auto& r = out[it->second];
    if (f[5].empty()) continue;
    MethodOutcome o;
    o.method = method_from_string(f[5]);
    o.coverage = parse_double(f[6], lineno);
    o.mean_size = parse_double(f[7], lineno);
    o.q_hat = parse_double(f[8], lineno);
    o.diagnostic_E = parse_double(f[9], lineno);
    r.outcomes.push_back(o);
    if (o.method == Method::unsupervised && !f[11].empty()) {
      UnsupervisedDetails d;
      d.sigma = parse_double(f[11], lineno);
      d.sigma_index = parse_uint(f[12], lineno);
      d.q0 = parse_double(f[13], lineno);
      d.selection_statistic = parse_double(f[14], lineno);
      d.selection_lambda = parse_double(f[15], lineno);
      d.loss_bound = parse_double(f[16], lineno);
      d.loss_bound_floored = f[17] == "1";
      d.constrained = f[18] == "1";
      d.solver.objective_value = parse_double(f[19], lineno);
      d.solver.iterations = static_cast<int>(parse_uint(f[20], lineno));
      d.solver.converged = f[21] == "1";
      d.solver.inequality_slack = parse_double(f[22], lineno);
      d.solver.multiplier = parse_double(f[23], lineno);
      d.solver.bisections = static_cast<int>(parse_uint(f[24], lineno));
      d.solver.final_step_relative_change = parse_double(f[25], lineno);
      d.mmd = parse_double(f[26], lineno);
      d.rkhs_norm = parse_double(f[27], lineno);
      d.approx_error = parse_double(f[28], lineno);
      d.approx_surrogate = f[29] == "1";
      d.gap_bound = parse_double(f[30], lineno);
      d.diagnostic_bound = parse_double(f[31], lineno);
      d.objective_bound = parse_double(f[32], lineno);
      r.unsupervised = d;
    }
  }
  return out;
}

}  // namespace ucp
