#include <benchmark/benchmark.h>

#include "compctl/freq.hpp"
#include "compctl/search.hpp"
#include "compctl/sim.hpp"

namespace {

using namespace compctl;

LtiPlant boeing() {
  Matrix A(4, 4);
  A << 0.99, 0.03, -0.02, -0.32,  //
      0.01, 0.47, 4.7, 0.0,       //
      0.02, -0.06, 0.40, 0.0,     //
      0.01, -0.04, 0.72, 0.99;
  Matrix Bu(4, 2);
  Bu << 0.01, 0.99,  //
      -3.44, 1.66,   //
      -0.83, 0.44,   //
      -0.47, 0.25;
  return normalize_control_weight(A, Bu, Matrix::Identity(4, 4),
                                  Matrix::Identity(4, 4));
}

struct Fixture {
  LtiPlant plant = boeing();
  Controller competitive =
      *optimize_competitive(plant, Causality::kCausal, std::nullopt)
           .synthesis.controller;
  Controller hinf =
      *optimize_hinf(plant, Causality::kCausal, std::nullopt).synthesis.controller;
  Controller h2 = synth_h2_ih(plant);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

template <auto Sweep>
void BM_Sweep(benchmark::State& state) {
  const Fixture& f = fixture();
  const ClosedLoop loop = closed_loop(f.plant, f.competitive);
  const std::vector<double> grid = uniform_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Sweep(f.plant, loop, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Compare>
void BM_Compare(benchmark::State& state) {
  const Fixture& f = fixture();
  const int T = static_cast<int>(state.range(0));
  const std::vector<NamedController> ctrls{
      {"h2", f.h2}, {"hinf", f.hinf}, {"competitive", f.competitive}};
  DisturbanceSpec spec;
  spec.kind = DisturbanceKind::kWhiteGaussian;
  spec.length = T;
  spec.dim = 4;
  spec.seed = 1;
  const auto w = generate_disturbance(spec);
  const LtvPlant plant = promote(f.plant, T);
  for (auto _ : state) benchmark::DoNotOptimize(Compare(plant, ctrls, w));
}

}  // namespace

BENCHMARK(BM_Sweep<compctl::sweep>)->Name("sweep/parallel")->Arg(512)->Arg(4096);
BENCHMARK(BM_Sweep<compctl::sweep_serial>)->Name("sweep/serial")->Arg(512)->Arg(4096);
BENCHMARK(BM_Compare<compctl::compare>)->Name("compare/parallel")->Arg(1000)->Arg(5000);
BENCHMARK(BM_Compare<compctl::compare_serial>)->Name("compare/serial")->Arg(1000)->Arg(5000);

BENCHMARK_MAIN();
