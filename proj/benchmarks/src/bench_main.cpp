#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "ucmlab/entropycheck.hpp"
#include "ucmlab/fvsolver.hpp"
#include "ucmlab/systems.hpp"

using namespace ucmlab;

static void BM_SvmFlux(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const SvmParams p;
  const SvmState q = sample_svm_state(rng, p);
  for (auto _ : state) benchmark::DoNotOptimize(flux_svm_normal(q, {0.6, 0.8}, p));
}
BENCHMARK(BM_SvmFlux);

static void BM_UcmFlux(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const UcmParams p;
  const Ucm3dState q = sample_ucm_state(rng, p);
  for (auto _ : state) benchmark::DoNotOptimize(flux_3d_normal(q, {0.0, 0.6, 0.8}, p));
}
BENCHMARK(BM_UcmFlux);

static void BM_UcmExactRelaxation(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const UcmParams p;
  const Matrix3 F = random_deformation3(rng, 0.1, 10.0);
  const SpdMatrix3 A = random_spd3(rng, 1e-2, 1e2);
  for (auto _ : state) benchmark::DoNotOptimize(relax_exact_3d(A, F, 0.1, p));
}
BENCHMARK(BM_UcmExactRelaxation);

static void BM_SymmetrizationDefect(benchmark::State& state) {
  const SystemInterface sys = state.range(0) == 0 ? svm_y_system(SvmParams{}) : ucm_y_system(UcmParams{});
  std::mt19937_64 rng(4);
  const StateVec q = sys.sampler(rng);
  for (auto _ : state) benchmark::DoNotOptimize(symmetrization_defect(sys, q, {0.6, 0.8, 0.0}));
}
BENCHMARK(BM_SymmetrizationDefect)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_StrangStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SvmSystem sys(SvmParams{});
  Grid g;
  g.nx = g.ny = n;
  g.dx = 1.0 / n;
  FvField f = make_field(g, sys, [&](double x, double y, double* q) {
    const double H = 1.0 + 0.05 * std::sin(2 * M_PI * x) * std::cos(2 * M_PI * y);
    sys.store(SvmState::from_primitive(H, {0.1, 0.0}, Matrix2::identity(), SpdMatrix2::identity(), 1.0 / (H * H)), q);
  });
  SolverOptions opt;
  const double dt = cfl_dt(f, sys, opt);
  for (auto _ : state) strang_step(f, sys, dt, opt);
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_StrangStep)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
