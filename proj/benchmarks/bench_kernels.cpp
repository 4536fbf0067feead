#include <benchmark/benchmark.h>

#include "wntk/analytic_kernels.hpp"
#include "wntk/data.hpp"
#include "wntk/mlp.hpp"
#include "wntk/regression.hpp"

using namespace wntk;

static void BM_AnalyticLayerKernels(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = sphere_regression(n, 16, 1).x;
  const NetworkShape shape{16, 3};
  for (auto _ : state) benchmark::DoNotOptimize(layer_kernels_from_stack(sigma_recursion(x, shape)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AnalyticLayerKernels)->RangeMultiplier(2)->Range(32, 256)->Complexity(benchmark::oNSquared);

static void BM_AnalyticWntkRecursion(benchmark::State& state) {
  const Matrix x = sphere_regression(128, 16, 2).x;
  const SigmaStack s = sigma_recursion(x, NetworkShape{16, 4});
  const LayerWeights w({0.5, 1.0, 2.0, 1.5});
  for (auto _ : state) benchmark::DoNotOptimize(wntk_recursion(s, w));
}
BENCHMARK(BM_AnalyticWntkRecursion);

static void BM_TanhSigmaRecursion(benchmark::State& state) {
  const Matrix x = sphere_regression(64, 16, 3).x;
  NetworkShape shape{16, 3};
  shape.activation = ActivationKind::tanh();
  for (auto _ : state) benchmark::DoNotOptimize(sigma_recursion(x, shape));
}
BENCHMARK(BM_TanhSigmaRecursion);

static void BM_EmpiricalLayerKernels(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const Matrix x = sphere_regression(32, 16, 4).x;
  const Mlp m = init_mlp(equal_widths(16, width, 3), InitOptions{}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_layer_kernels(m, x, x));
}
BENCHMARK(BM_EmpiricalLayerKernels)->RangeMultiplier(4)->Range(64, 1024);

static void BM_FitKrr(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = sphere_regression(n, 16, 6).x;
  const Matrix k = ntk_from_stack(sigma_recursion(x, NetworkShape{16, 3}));
  const Matrix y = sphere_regression(n, 16, 6).y;
  for (auto _ : state) benchmark::DoNotOptimize(fit_krr(k, y, 0.1, std::nullopt));
}
BENCHMARK(BM_FitKrr)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_MAIN();
