#include <map>

#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "tmcmc/map_optimizer.hpp"
#include "tmcmc/problems.hpp"
#include "tmcmc/transport_map.hpp"

using namespace tmcmc;

namespace {

std::vector<MultiIndexSet> sets_for(int n, int degree) {
  BasisSpec spec;
  spec.degree = degree;
  return spec.build(n);
}

// Cubic map fitted to exact banana samples, shared by the map benchmarks.
const TriangularMap& banana_map(int degree) {
  static std::map<int, TriangularMap> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) {
    Rng rng(1);
    const Eigen::MatrixXd x = BananaTarget{}.sample(5000, rng);
    it = cache.emplace(degree, fit_map(x, sets_for(2, degree), PolynomialFamily::kHermite, OptimizerConfig{}).map)
             .first;
  }
  return it->second;
}

void BM_Forward(benchmark::State& state) {
  const auto& map = banana_map(static_cast<int>(state.range(0)));
  const Eigen::Vector2d theta(0.4, -1.1);
  for (auto _ : state) benchmark::DoNotOptimize(map.forward(theta));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(3)->Arg(5);

void BM_LogDet(benchmark::State& state) {
  const auto& map = banana_map(static_cast<int>(state.range(0)));
  const Eigen::Vector2d theta(0.4, -1.1);
  for (auto _ : state) benchmark::DoNotOptimize(map.log_det_jacobian(theta));
}
BENCHMARK(BM_LogDet)->Arg(3);

void BM_Inverse(benchmark::State& state) {
  const auto& map = banana_map(static_cast<int>(state.range(0)));
  const Eigen::Vector2d r(0.7, 1.3);
  for (auto _ : state) benchmark::DoNotOptimize(map.inverse(r));
}
BENCHMARK(BM_Inverse)->Arg(1)->Arg(3)->Arg(5);

void BM_InverseWithHint(benchmark::State& state) {
  const auto& map = banana_map(3);
  const Eigen::Vector2d r(0.7, 1.3);
  const Eigen::VectorXd hint = map.inverse(r) + Eigen::Vector2d(0.05, -0.05);
  for (auto _ : state) benchmark::DoNotOptimize(map.inverse(r, &hint));
}
BENCHMARK(BM_InverseWithHint);

void BM_FitCold(benchmark::State& state) {
  Rng rng(2);
  const Eigen::MatrixXd x = BananaTarget{}.sample(state.range(0), rng);
  const auto sets = sets_for(2, static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_map(x, sets, PolynomialFamily::kHermite, OptimizerConfig{}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitCold)->Args({1000, 3})->Args({10000, 3})->Args({10000, 5})->Unit(benchmark::kMillisecond);

void BM_FitWarmAfterAppend(benchmark::State& state) {
  Rng rng(3);
  const Eigen::MatrixXd x = BananaTarget{}.sample(11000, rng);
  const auto sets = sets_for(2, 3);
  MapFitter fitter(sets, PolynomialFamily::kHermite, OptimizerConfig{});
  fitter.append(x.topRows(10000));
  const auto previous = fitter.fit();
  fitter.append(x.bottomRows(1000));
  for (auto _ : state) benchmark::DoNotOptimize(fitter.fit(&previous.map));
}
BENCHMARK(BM_FitWarmAfterAppend)->Unit(benchmark::kMillisecond);

void BM_WorkspaceAppend(benchmark::State& state) {
  Rng rng(4);
  const Eigen::MatrixXd x = BananaTarget{}.sample(1000, rng);
  const auto set = build_total_order(1, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    ComponentWorkspace ws(set, PolynomialFamily::kHermite);
    ws.append(x);
    benchmark::DoNotOptimize(ws.gram().data());
  }
}
BENCHMARK(BM_WorkspaceAppend)->Arg(3)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
