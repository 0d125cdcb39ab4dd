#include <random>

#include <benchmark/benchmark.h>

#include "saddle/gp_surrogate.hpp"
#include "saddle/linalg.hpp"
#include "saddle/saddle_dynamics.hpp"
#include "saddle/sequential_learner.hpp"
#include "saddle/systems/init_directions.hpp"
#include "saddle/systems/phasefield.hpp"
#include "saddle/systems/rosenbrock.hpp"

namespace {

using namespace saddle;

SymmetricMatrix random_symmetric(Index n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return SymmetricMatrix(a + a.transpose());
}

void BM_SymEigen(benchmark::State& state) {
  const SymmetricMatrix a = random_symmetric(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sym_eigen(a));
}
BENCHMARK(BM_SymEigen)->Arg(4)->Arg(12)->Arg(32)->Arg(63);

void BM_GpFit(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  systems::RosenbrockOracle force(systems::rosenbrock_case("ii"));
  std::mt19937_64 rng(7);
  TrustRegion region{Vector::Ones(4), 0.025};
  TrainingSet data(4, 4);
  for (const Vector& x : lhs_sample(region, m, rng)) data.add(x, force.evaluate(x));
  const FitConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, cfg));
}
BENCHMARK(BM_GpFit)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SdStep(benchmark::State& state) {
  systems::RosenbrockOracle force(systems::rosenbrock_case("iv"));
  SdParams p;
  p.k = 4;
  const Vector x0 = Vector::Constant(4, 0.9);
  SdState s = make_state(x0, systems::init_directions(fd_jacobian_sym(force, x0, 1e-5), p.k).frame, p);
  for (auto _ : state) {
    s = sd_step(force, s, p);
    if (s.step > 1000) s = make_state(x0, s.frame, p);
  }
}
BENCHMARK(BM_SdStep);

void BM_PhaseFieldForce(benchmark::State& state) {
  systems::PhaseFieldOracle force(systems::PhaseFieldConfig{});
  const Vector u = systems::phasefield_initial_profile(force.config());
  for (auto _ : state) benchmark::DoNotOptimize(force.evaluate(u));
}
BENCHMARK(BM_PhaseFieldForce);

void BM_FracLaplacianMatrix(benchmark::State& state) {
  systems::PhaseFieldConfig cfg;
  cfg.h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(systems::frac_laplacian_matrix(cfg));
}
BENCHMARK(BM_FracLaplacianMatrix)->Arg(32)->Arg(128);

}  // namespace
BENCHMARK_MAIN();
