#include <benchmark/benchmark.h>

#include <random>

#include "l1lab/basis_pursuit.hpp"
#include "l1lab/dictionary.hpp"
#include "l1lab/free_energy.hpp"
#include "l1lab/replica_solver.hpp"

using namespace l1lab;

static void BM_HaarOrthogonal(benchmark::State& state) {
  Rng rng(1);
  const int M = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(haar_orthogonal(M, rng));
}
BENCHMARK(BM_HaarOrthogonal)->Arg(8)->Arg(16)->Arg(64);

static void BM_SolveLambda(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(T, 0.8, 1.2);
  const NormVector nv(v);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lambda(nv));
}
BENCHMARK(BM_SolveLambda)->DenseRange(3, 8, 5);

static void BM_CriticalPoint(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const DensityProfile p = state.range(1) ? DensityProfile::localized(T) : DensityProfile::uniform(T);
  for (auto _ : state) benchmark::DoNotOptimize(critical_point(p));
}
BENCHMARK(BM_CriticalPoint)->ArgsProduct({{2, 5, 8}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_SolveBp(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0)), M = static_cast<int>(state.range(1));
  const Dictionary d = build_dictionary(DictionaryKind::concat_orthogonal, T, M, 42);
  Rng rng(7);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(d.N());
  for (int k = 0; k < M / 4; ++k) x0[(k * 7) % d.N()] = normal(rng);
  const Eigen::VectorXd y = d.matrix * x0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_bp(d, y));
}
BENCHMARK(BM_SolveBp)->Args({2, 16})->Args({5, 21})->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
