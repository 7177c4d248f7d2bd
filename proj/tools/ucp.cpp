// ucp: run unsupervised-calibration conformal experiments from a JSON config.
//
//   ucp run --config <path> [--seed N] [--workers K] [--out DIR]
//
// Exit status: 0 when every trial succeeds, 2 when some trials fail, 1 on
// configuration or usage errors. UCP_WORKERS sets the worker count when --workers is absent.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ucp/error.hpp"
#include "ucp/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Conformal classification with unsupervised calibration"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--seed", seed, "Base seed (overrides the config)");
  run->add_option("--workers", workers, "Worker threads (default: $UCP_WORKERS, then the config, then 1)")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  ucp::ExperimentConfig cfg;
  try {
    cfg = ucp::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (workers)
      cfg.workers = *workers;
    else if (const auto env = ucp::env_worker_count())
      cfg.workers = *env;
    if (out_dir) cfg.out_dir = *out_dir;
    cfg.validate();
  } catch (const ucp::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    const auto results = ucp::run_experiment(cfg);
    ucp::emit_results(results, cfg.out_dir);
    for (const auto& r : results.records)
      if (!r.ok) std::cerr << "failed: " << r.error << '\n';
    std::cout << "wrote " << cfg.out_dir.string() << " (" << results.records.size() - results.failed << "/"
              << results.records.size() << " trials ok)\n";
    return results.complete() ? 0 : 2;
  } catch (const ucp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
