#include <benchmark/benchmark.h>

#include "kernelflow/descent.hpp"
#include "kernelflow/estimators.hpp"
#include "kernelflow/prox.hpp"
#include "kernelflow/rng.hpp"
#include "kernelflow/spectral.hpp"

namespace {

Eigen::MatrixXd inputs(int n) {
  kernelflow::RandomStream stream(42);
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i) X(i, 0) = -10.0 + 20.0 * stream.next_uniform();
  return X;
}

Eigen::VectorXd response(int n) {
  kernelflow::RandomStream stream(43);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = stream.next_normal();
  return y;
}

void BuildKernelMatrix(benchmark::State& state) {
  const Eigen::MatrixXd X = inputs(static_cast<int>(state.range(0)));
  const kernelflow::KernelSpec spec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernelflow::kernel_matrix(spec, X, 1e-10));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BuildKernelMatrix)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void Eigendecompose(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto K = kernelflow::kernel_matrix(kernelflow::KernelSpec{}, inputs(n), 1e-10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernelflow::eig_sym(K));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(Eigendecompose)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void RidgePathViaFilter(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto decomp = kernelflow::eig_sym(
      kernelflow::kernel_matrix(kernelflow::KernelSpec{}, inputs(n), 1e-10));
  const Eigen::VectorXd y = response(n);
  for (auto _ : state) {
    for (double lambda = 1e-4; lambda < 1e2; lambda *= 2.0) {
      benchmark::DoNotOptimize(
          kernelflow::apply_filter(decomp, kernelflow::Filter::krr(lambda), y));
    }
  }
}
BENCHMARK(RidgePathViaFilter)->Arg(128)->Arg(256);

void DescentPath(benchmark::State& state) {
  const int n = 128;
  const auto K = kernelflow::kernel_matrix(kernelflow::KernelSpec{}, inputs(n), 1e-10);
  const Eigen::VectorXd y = response(n);
  kernelflow::DescentConfig config;
  config.method = static_cast<kernelflow::DescentMethod>(state.range(0));
  config.step_size = 1e-3;
  config.max_steps = 2000;
  config.checkpoint_stride = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernelflow::run_descent(K, y, config));
  }
}
BENCHMARK(DescentPath)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void ProxSolve(benchmark::State& state) {
  const int n = 128;
  const auto K = kernelflow::kernel_matrix(kernelflow::KernelSpec{}, inputs(n), 1e-10);
  const Eigen::VectorXd y = response(n);
  kernelflow::ProxConfig config;
  config.penalty = state.range(0) == 0 ? kernelflow::Penalty::l1
                                       : kernelflow::Penalty::linf;
  config.lambda = 0.1;
  config.max_iter = 5000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernelflow::fit_prox(K, y, config));
  }
}
BENCHMARK(ProxSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
