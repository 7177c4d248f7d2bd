#include <benchmark/benchmark.h>

#include "ucp/kernel.hpp"
#include "ucp/rng.hpp"
#include "ucp/weights.hpp"

namespace {

struct Fixture {
  ucp::Matrix x;
  std::vector<ucp::Label> y;
  ucp::ScoreMatrix scores;
};

Fixture make_fixture(int n, int c, int d, std::uint64_t seed) {
  ucp::Rng rng(seed);
  std::normal_distribution<double> g;
  Fixture f;
  f.x.resize(n, d);
  for (Eigen::Index k = 0; k < f.x.size(); ++k) f.x.data()[k] = g(rng);
  f.y.resize(n);
  for (auto& v : f.y) v = static_cast<ucp::Label>(rng() % static_cast<unsigned>(c));
  f.scores.values.resize(n, c);
  for (Eigen::Index k = 0; k < f.scores.values.size(); ++k) f.scores.values.data()[k] = ucp::uniform01(rng);
  return f;
}

void BM_BuildContext(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = make_fixture(n, 10, 10, 1);
  for (auto _ : state) benchmark::DoNotOptimize(ucp::build_context(f.x, f.x, f.y, 10, {1.0}));
  state.SetComplexityN(n);
}
BENCHMARK(BM_BuildContext)->Arg(250)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_KernelApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = make_fixture(n, 10, 10, 2);
  const auto ctx = ucp::build_context(f.x, f.x, f.y, 10, {1.0});
  ucp::Vector w = ucp::Vector::Constant(n * 10, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(ctx.apply(w));
}
BENCHMARK(BM_KernelApply)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_SolveLabelWeights(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int c = static_cast<int>(state.range(1));
  const auto f = make_fixture(n, c, 5, 3);
  const auto ctx = ucp::build_context(f.x, f.x, f.y, c, {1.0});
  const auto init = ucp::naive_weights(ucp::Matrix(1.0 - f.scores.values.array()));
  for (auto _ : state) benchmark::DoNotOptimize(ucp::solve_label_weights(ctx, std::nullopt, {}, &init));
}
BENCHMARK(BM_SolveLabelWeights)->Args({200, 3})->Args({1000, 3})->Args({1000, 10})->Unit(benchmark::kMillisecond);

void BM_SolveConstrained(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int c = 10;
  const auto f = make_fixture(n, c, 5, 4);
  const auto ctx = ucp::build_context(f.x, f.x, f.y, c, {1.0});
  ucp::Matrix probs = 1.0 - f.scores.values.array();
  for (Eigen::Index i = 0; i < probs.rows(); ++i) probs.row(i) /= probs.row(i).sum();
  // A bound halfway between the best and the uniform loss keeps it active.
  double best = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) best += -std::log(probs.row(i).maxCoeff());
  auto cs = ucp::cross_entropy_constraint(probs, 0.5 * (best / n + std::log(10.0)));
  const auto init = ucp::naive_weights(probs);
  for (auto _ : state) benchmark::DoNotOptimize(ucp::solve_label_weights(ctx, cs, {}, &init));
}
BENCHMARK(BM_SolveConstrained)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_MinNormInterpolation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = make_fixture(n, 3, 2, 5);
  const auto ctx = ucp::build_context(f.x, f.x, f.y, 3, {0.3});
  const ucp::Vector u = ucp::coverage_indicator(f.scores, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(ucp::min_norm_interpolation(ctx.gram, 3, u));
}
BENCHMARK(BM_MinNormInterpolation)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SelectKernelApprox(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = make_fixture(n, 3, 2, 6);
  const auto grid = ucp::default_bandwidth_grid(2);
  const auto naive = ucp::naive_weights(ucp::Matrix(1.0 - f.scores.values.array()));
  for (auto _ : state) benchmark::DoNotOptimize(ucp::select_kernel_approx(grid, f.x, f.scores, naive, 0.1));
}
BENCHMARK(BM_SelectKernelApprox)->Arg(400)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
