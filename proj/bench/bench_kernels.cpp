#include "svgpmap/kernels.hpp"
#include "svgpmap/svgp.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace svgpmap;

namespace {

Points2 points(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  Points2 p(n, 2);
  for (int i = 0; i < n; ++i) p.row(i) << u(rng), u(rng);
  return p;
}

SvgpModel model(int s) {
  SvgpModel m;
  m.kernel = KernelParams::from_values(50.0, 4.0);
  m.inducing.z = points(s, 1);
  m.variational.mean = Eigen::VectorXd::LinSpaced(s, -1.0, 1.0);
  m.variational.chol_cov = 0.1 * Eigen::MatrixXd::Identity(s, s);
  return m;
}

void BM_GramParallel(benchmark::State& state) {
  const Points2 a = points(static_cast<int>(state.range(0)), 2), b = points(200, 3);
  const KernelParams p = KernelParams::from_values(50.0, 4.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram(a, b, p));
  state.SetItemsProcessed(state.iterations() * a.rows() * b.rows());
}

void BM_GramSerial(benchmark::State& state) {
  const Points2 a = points(static_cast<int>(state.range(0)), 2), b = points(200, 3);
  const KernelParams p = KernelParams::from_values(50.0, 4.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram_serial(a, b, p));
  state.SetItemsProcessed(state.iterations() * a.rows() * b.rows());
}

void BM_PredictParallel(benchmark::State& state) {
  const PredictiveCache cache(model(200));
  const Points2 q = points(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(predict(cache, q));
  state.SetItemsProcessed(state.iterations() * q.rows());
}

void BM_PredictReference(benchmark::State& state) {
  const SvgpModel m = model(200);
  const Points2 q = points(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(predict_reference(m, q));
  state.SetItemsProcessed(state.iterations() * q.rows());
}

void BM_ElboWithGradient(benchmark::State& state) {
  const SvgpModel m = model(static_cast<int>(state.range(0)));
  const Points2 x = points(1000, 5);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(1000);
  for (auto _ : state) benchmark::DoNotOptimize(elbo(m, x, y, true).value);
}

}  // namespace

BENCHMARK(BM_GramParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_GramSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_PredictParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_PredictReference)->Arg(1000)->Arg(10000);
BENCHMARK(BM_ElboWithGradient)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
