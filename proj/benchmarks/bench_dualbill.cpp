#include <benchmark/benchmark.h>

#include <cmath>

#include "dualbill/dual_map.hpp"
#include "dualbill/orbit_finder.hpp"
#include "dualbill/sharpness.hpp"

using namespace dualbill;

namespace {

SupportSurface perturbed(int m) {
  PerturbationParams p{{}, 0.1};
  for (int i = 1; i <= m; ++i) p.a.push_back(i);
  return SupportSurface::perturbed_sphere(p);
}

Vector exterior_point(int m) {
  Vector z = Vector::Zero(2 * m);
  z(0) = 1.7;
  z(2 * m - 1) = 0.6;
  return z;
}

void BM_DualMap(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const SupportSurface s = perturbed(m);
  const Vector z = exterior_point(m);
  for (auto _ : state) benchmark::DoNotOptimize(dual_map(s, z, Direction::forward).image);
}
BENCHMARK(BM_DualMap)->DenseRange(1, 3);

void BM_SymplecticityDefect(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const SupportSurface s = perturbed(m);
  const Vector z = exterior_point(m);
  for (auto _ : state) benchmark::DoNotOptimize(symplecticity_defect(s, z));
}
BENCHMARK(BM_SymplecticityDefect)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_NewtonPolish(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  PerturbationParams p{{}, 0.1};
  for (int i = 1; i <= m; ++i) p.a.push_back(i);
  const SupportSurface s = SupportSurface::perturbed_sphere(p);
  Vector u = Vector::Zero(2 * m);
  u(0) = 0.9;
  u(1 % (2 * m)) += 0.3;
  u(2 * m - 1) += 0.3;
  const TangencyTuple seed = sphere_seed(u.normalized());
  for (auto _ : state) benchmark::DoNotOptimize(newton_polish(s, seed).residual);
}
BENCHMARK(BM_NewtonPolish)->DenseRange(1, 3);

void BM_MultistartSearch(benchmark::State& state) {
  const SupportSurface s = perturbed(2);
  SearchOptions opts;
  opts.n_starts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(multistart_search(s, opts).count());
}
BENCHMARK(BM_MultistartSearch)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_CriticalSweep(benchmark::State& state) {
  const PerturbationParams p{{1.0, 2.0, 3.0}, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(sweep_critical_points(p).converged);
}
BENCHMARK(BM_CriticalSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
