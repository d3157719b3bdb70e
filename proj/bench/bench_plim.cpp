#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "plim/atlas/build.hpp"
#include "plim/elastowave/coupled.hpp"
#include "plim/systems/systems.hpp"

using namespace plim;

namespace {

par::Exec exec_of(const benchmark::State& state) { return state.range(0) ? par::Exec::Parallel : par::Exec::Serial; }

void BM_GalerkinRhs(benchmark::State& state) {
  elasto::Medium1D m;
  const auto ops = elasto::assemble_galerkin(m, 0.0, m.length, 20, elasto::Boundary::Fixed);
  const FineSystem sys = elasto::galerkin_system(ops, 0.0, 0.0, nullptr, exec_of(state));
  Vec f = Vec::Zero(2 * ops.eta);
  for (int i = 0; i < ops.eta; ++i) f(ops.eta + i) = std::sin(8.0 * std::numbers::pi * ops.x[static_cast<std::size_t>(i)]);
  for (auto _ : state) benchmark::DoNotOptimize(sys(f));
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

void BM_AtlasBuild(benchmark::State& state) {
  AtlasSpec spec = systems::default_atlas_spec("hamiltonian4");
  spec.gsolve.anneal.iters_per_temp = 40;
  BuildOptions opt;
  opt.blocks = {BlockIndex{{1, 1}}, BlockIndex{{2, 1}}};
  opt.exec = exec_of(state);
  const GEquation geq = systems::hamiltonian_geq();
  for (auto _ : state) benchmark::DoNotOptimize(build_atlas(spec, geq, opt));
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

void BM_CoupledStep(benchmark::State& state) {
  elasto::Medium1D m;
  elasto::CoupledConfig cfg;
  cfg.exec = exec_of(state);
  const double k = 8.0 * std::numbers::pi;
  for (auto _ : state) {
    state.PauseTiming();
    auto domain = elasto::make_coupled_domain(m, cfg);
    auto s = elasto::coupled_initial_state(domain, [](double) { return 0.0; }, [k](double x) { return std::sin(k * x); });
    state.ResumeTiming();
    for (int step = 0; step < 3; ++step) s = elasto::coupled_coarse_step(domain, s, 7.7e-3);
    benchmark::DoNotOptimize(s);
  }
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_GalerkinRhs)->Arg(0)->Arg(1);
BENCHMARK(BM_AtlasBuild)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoupledStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
