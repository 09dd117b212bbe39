#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "ehdcs/analysis.hpp"
#include "ehdcs/energy.hpp"
#include "ehdcs/montecarlo.hpp"
#include "ehdcs/rng.hpp"
#include "ehdcs/scci.hpp"
#include "ehdcs/sensing.hpp"
#include "ehdcs/solver.hpp"

using namespace ehdcs;

namespace {

Vector planted(int n, int s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::normal_distribution<double> g;
  Vector x = Vector::Zero(n);
  for (int i = 0; i < s; ++i) x[idx[i]] = g(rng);
  return x;
}

// args: m, n, s, algorithm (0 homotopy, 1 admm)
void BM_BasisPursuit(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0)), n = static_cast<int>(state.range(1));
  const Matrix A = gaussian_matrix(m, n, 1);
  const Vector y = A * planted(n, static_cast<int>(state.range(2)), 2);
  SolveOptions opts;
  opts.algorithm = state.range(3) == 0 ? SolverAlgorithm::homotopy : SolverAlgorithm::admm;
  opts.fallback = false;
  opts.max_iterations = 100000;
  for (auto _ : state) benchmark::DoNotOptimize(basis_pursuit(A, y, opts).x.data());
}
BENCHMARK(BM_BasisPursuit)
    ->Args({20, 50, 4, 0})
    ->Args({20, 50, 4, 1})
    ->Args({40, 150, 9, 0})
    ->Args({120, 450, 20, 0})
    ->Unit(benchmark::kMicrosecond);

void BM_Omp(benchmark::State& state) {
  const Matrix A = gaussian_matrix(20, 50, 3);
  const Vector y = A * planted(50, 4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(omp(A, y, 4).x.data());
}
BENCHMARK(BM_Omp)->Unit(benchmark::kMicrosecond);

void BM_HypoexpSf(benchmark::State& state) {
  std::vector<double> rates;
  for (int k = 0; k < state.range(0); ++k) rates.push_back(0.01 * (1.0 + 0.37 * k));
  if (state.range(1)) rates.assign(rates.size(), 0.01);  // ties: phase-type path
  for (auto _ : state) benchmark::DoNotOptimize(hypoexp_sf(rates, 150.0));
}
BENCHMARK(BM_HypoexpSf)->Args({3, 0})->Args({9, 0})->Args({9, 1});

void BM_DcsBound(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const EhParams eh = EhParams::from_total(300.0, 2.0, K, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(pidr_dcs_bound(eh, 4, 1, K));
}
BENCHMARK(BM_DcsBound)->Arg(2)->Arg(8);

void BM_SubsetCondition(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  Rng rng(5);
  const LocationMatrix loc = draw_location(ScciParams{50, K, 4, 1, 1.0}, rng);
  const std::vector<int> m(K, 6);
  for (auto _ : state) benchmark::DoNotOptimize(subset_condition_holds(m, 1, loc, 1));
}
BENCHMARK(BM_SubsetCondition)->Arg(2)->Arg(8)->Arg(16);

// One synthetic trial end to end; args: K, mode (0 cs, 1 dcs)
void BM_Trial(benchmark::State& state) {
  CampaignConfig c;
  const int K = static_cast<int>(state.range(0));
  c.scci = ScciParams{50, K, 4, 1, 1.0};
  c.eh = EhParams::from_total(200.0, 1.0, K, 1.0);
  c.mode = state.range(1) == 0 ? RecoveryMode::cs : RecoveryMode::dcs;
  long long t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(c, t++).success);
}
BENCHMARK(BM_Trial)->Args({2, 0})->Args({2, 1})->Args({8, 0})->Args({8, 1})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
