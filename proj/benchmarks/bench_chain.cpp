#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "tmcmc/map_optimizer.hpp"
#include "tmcmc/mcmc.hpp"
#include "tmcmc/problems.hpp"

using namespace tmcmc;

namespace {

TriangularMap fitted_bod_map() {
  // Exact samples are unavailable for BOD, so fit on a short identity-map chain.
  ChainConfig cfg;
  cfg.steps = 20000;
  cfg.burn_in = 2000;
  cfg.adapt = false;
  cfg.proposal = RandomWalk{0.02};
  cfg.seed = 5;
  const auto problem = make_problem({"bod"});
  const auto chain = run_adaptive(cfg, problem.target, problem.start);
  BasisSpec spec;
  spec.degree = 3;
  return fit_map(chain.samples.bottomRows(18000), spec.build(2), PolynomialFamily::kHermite, OptimizerConfig{}).map;
}

void BM_MhStep(benchmark::State& state, ReferenceProposal prop) {
  const auto problem = make_problem({"bod"});
  static const TriangularMap map = fitted_bod_map();
  auto chain = ChainState::start(problem.target, map, problem.start, false);
  Rng rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(mh_step(chain, map, prop, problem.target, rng, 0.1));
}
BENCHMARK_CAPTURE(BM_MhStep, rw, ReferenceProposal{RandomWalk{1.0}});
BENCHMARK_CAPTURE(BM_MhStep, drg, ReferenceProposal{DelayedRejectionGlobal{0.5}});
BENCHMARK_CAPTURE(BM_MhStep, mix, ReferenceProposal{Mixture{}});

void BM_PredatorPreyDensity(benchmark::State& state) {
  const auto problem = make_problem({"predator-prey"});
  for (auto _ : state) benchmark::DoNotOptimize(problem.target.log_density(problem.start));
}
BENCHMARK(BM_PredatorPreyDensity)->Unit(benchmark::kMicrosecond);

void BM_AdaptiveChain(benchmark::State& state) {
  const auto problem = make_problem({"banana"});
  ChainConfig cfg;
  cfg.steps = 10000;
  cfg.burn_in = 1000;
  cfg.adapt_interval = 1000;
  cfg.basis.degree = 3;
  for (auto _ : state) benchmark::DoNotOptimize(run_adaptive(cfg, problem.target, problem.start));
  state.SetItemsProcessed(state.iterations() * cfg.steps);
}
BENCHMARK(BM_AdaptiveChain)->Unit(benchmark::kMillisecond);

}  // namespace
