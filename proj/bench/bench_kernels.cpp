// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "qbm/classical_oracle.hpp"
#include "qbm/generator.hpp"
#include "qbm/master_equations.hpp"

using namespace qbm;

namespace {

GeneratorSpec qfpe_spec() {
  GeneratorSpec s;
  s.kind = GeneratorKind::qfpe;
  s.eta = 1;
  s.D_p = 1;
  s.D_x = 0.25;
  return s;
}

void BM_GeneratorReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid g = make_grid(n, 20);
  const auto rho = gaussian_state(g, 0, 0, 1).values;
  const Operators ops = build_operators(g, 1.0);
  const auto spec = qfpe_spec();
  for (auto _ : state) benchmark::DoNotOptimize(reference::generator_apply(rho, spec, ops, g.hbar));
}

void BM_GeneratorSpectral(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid g = make_grid(n, 20);
  const auto rho = gaussian_state(g, 0, 0, 1).values;
  const SpectralGenerator gen(g, qfpe_spec());
  Eigen::MatrixXcd out(rho.rows(), rho.cols());
  for (auto _ : state) {
    gen.apply(rho, out);
    benchmark::DoNotOptimize(out.data());
  }
}

const std::vector<PhasePoint>& langevin_initial() {
  static const auto pts = sample_gaussian_ensemble(256, 0, 0, 1, 1, 1);
  return pts;
}

void BM_LangevinSerial(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::langevin_simulate({1, 1, 1}, langevin_initial(), 1e-3, 1, 0, 3));
}

void BM_LangevinParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(langevin_simulate({1, 1, 1}, langevin_initial(), 1e-3, 1, 0, 3));
}

}  // namespace

BENCHMARK(BM_GeneratorReference)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GeneratorSpectral)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LangevinSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LangevinParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
