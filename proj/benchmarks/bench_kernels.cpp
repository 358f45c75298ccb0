#include "lrmt/convdiff.hpp"
#include "lrmt/preconditioner.hpp"
#include "lrmt/reduced_solve.hpp"
#include "lrmt/sketch.hpp"
#include "lrmt/solver.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <random>

namespace {

using namespace lrmt;

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

LowRankMatrix random_low_rank(Index n, Index rank, std::uint64_t seed) {
  return LowRankMatrix(gaussian(n, rank, seed), Matrix::Identity(rank, rank),
                       gaussian(n, rank, seed + 1));
}

const MultitermEquation& convdiff(Index n) {
  static std::map<Index, MultitermEquation> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_convdiff({n, 0.1, 1.0})).first;
  return it->second;
}

void BM_Truncate(benchmark::State& state) {
  const Index n = state.range(0);
  const Index rank = state.range(1);
  const LowRankMatrix m = random_low_rank(n, rank, 1);
  TruncationConfig cfg;
  cfg.maxrank = 50;
  for (auto _ : state) benchmark::DoNotOptimize(truncate(m, cfg));
}
BENCHMARK(BM_Truncate)->Args({1024, 100})->Args({4096, 200})->Unit(benchmark::kMillisecond);

void BM_ApplyL(benchmark::State& state) {
  const MultitermEquation& eq = convdiff(state.range(0));
  const LowRankMatrix x = random_low_rank(eq.n_a(), 50, 2);
  for (auto _ : state) benchmark::DoNotOptimize(apply_L(eq, x));
}
BENCHMARK(BM_ApplyL)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_SketchApply(benchmark::State& state) {
  const Index n = state.range(0);
  const SketchOperator s(n, 404, 3);
  const Matrix v = gaussian(n, 200, 4);
  for (auto _ : state) benchmark::DoNotOptimize(s.apply(v));
}
BENCHMARK(BM_SketchApply)->Arg(1022)->Arg(4094)->Unit(benchmark::kMillisecond);

void BM_SketchedResidual(benchmark::State& state) {
  const MultitermEquation& eq = convdiff(state.range(0));
  const LowRankMatrix x = random_low_rank(eq.n_a(), 50, 5);
  const SketchPolicy policy = SketchPolicy::choose(eq.n_a(), eq.n_b(), eq.p(), 50, eq.q());
  const SketchOperator sa(eq.n_a(), policy.s, 6);
  const SketchOperator sb(eq.n_b(), policy.s, 7);
  TruncationConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(sketched_residual_truncate(eq, x, &sa, &sb, cfg));
}
BENCHMARK(BM_SketchedResidual)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_ReducedDirect(benchmark::State& state) {
  const MultitermEquation& eq = convdiff(1024);
  const Index q = state.range(0);
  const Matrix pl = orthonormal_basis(gaussian(eq.n_a(), q, 8));
  const Matrix pr = orthonormal_basis(gaussian(eq.n_b(), q, 9));
  const ReducedSystem sys(eq, pl, pr);
  const Matrix rhs = gaussian(q, q, 10);
  for (auto _ : state) benchmark::DoNotOptimize(solve_reduced(sys, rhs, {}));
}
BENCHMARK(BM_ReducedDirect)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_AdiApply(benchmark::State& state) {
  const MultitermEquation& eq = convdiff(state.range(0));
  const Preconditioner pre(eq, TwoTermAdiSpec{});
  const LowRankMatrix r = random_low_rank(eq.n_a(), 20, 11);
  for (auto _ : state) benchmark::DoNotOptimize(pre.apply(r));
}
BENCHMARK(BM_AdiApply)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_SolveConvDiff(benchmark::State& state) {
  const MultitermEquation& eq = convdiff(state.range(0));
  SolverConfig cfg;
  cfg.preconditioner = TwoTermAdiSpec{};
  cfg.inner.inner_precond_terms = std::array<Index, 2>{0, 1};
  for (auto _ : state) benchmark::DoNotOptimize(solve(eq, cfg));
}
BENCHMARK(BM_SolveConvDiff)->Arg(512)->Arg(1024)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
