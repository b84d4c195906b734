#include <benchmark/benchmark.h>

#include "binopt/inference.hpp"
#include "binopt/pde.hpp"
#include "binopt/synthetic.hpp"

namespace {

const binopt::GridSpec kPaperGrid{};
const binopt::ModelParams kParams{1.0, 0.0, 0.0, 1.0, 0.05};

void BM_AssembleCn(benchmark::State& state) {
  for (auto _ : state) {
    auto cn = binopt::assemble_cn(kParams, kPaperGrid);
    benchmark::DoNotOptimize(cn);
  }
}
BENCHMARK(BM_AssembleCn);

void BM_ThomasSolve(benchmark::State& state) {
  const auto cn = binopt::assemble_cn(kParams, kPaperGrid);
  std::vector<double> rhs(cn.system.matrix_a.size(), 1.0);
  for (auto _ : state) {
    auto x = binopt::solve_tridiagonal(cn.system.matrix_a, rhs);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_ThomasSolve);

void BM_SolveForwardPaperGrid(benchmark::State& state) {
  for (auto _ : state) {
    auto sol = binopt::solve_forward(kParams, kPaperGrid);
    benchmark::DoNotOptimize(sol);
  }
}
BENCHMARK(BM_SolveForwardPaperGrid)->Unit(benchmark::kMillisecond);

void BM_ForwardObserve(benchmark::State& state) {
  const auto points = kPaperGrid.interior_nodes();
  for (auto _ : state) {
    auto f = binopt::forward_observe(kParams, kPaperGrid, points);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_ForwardObserve)->Unit(benchmark::kMillisecond);

void BM_MhStep(benchmark::State& state) {
  const auto points = kPaperGrid.interior_nodes();
  const auto data = binopt::generate(kParams, kPaperGrid, points, {0.0, 1});
  binopt::PosteriorSpec spec{data.observations(), kPaperGrid, kParams.r,
                             {}, 0.005};
  binopt::Rng rng(7);
  binopt::McmcState current{kParams.theta(),
                            binopt::log_posterior(spec, kParams.theta())};
  const binopt::ThetaVec gamma{0.02, 0.02, 0.02, 0.01};
  for (auto _ : state) {
    auto next = binopt::mh_step(spec, current, gamma, rng);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_MhStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
