#include <benchmark/benchmark.h>

#include <cmath>

#include "amlab/barriers.hpp"
#include "amlab/pde_solver.hpp"

using namespace amlab;

namespace {

double p43(double t) { return t * std::cbrt(t); }

GridPtr square_grid(int nodes) {
  return Grid::build(Eigen::Vector2d(-1.0, -1.0), Eigen::Vector2d(1.0, 1.0),
                     nodes);
}

GridField oracle_field(const GridPtr& g) {
  return GridField(g, [](const Eigen::VectorXd& x) {
    return p43(x[0]) - p43(x[1]);
  });
}

void BM_StencilAssembly(benchmark::State& state) {
  const auto g = square_grid(static_cast<int>(state.range(0)));
  const QuadraticHamiltonian H(2, 1.0);
  const GridField u = oracle_field(g);
  for (auto _ : state) {
    auto st = LinearizedStencil::assemble(u, H, 0.05, true);
    benchmark::DoNotOptimize(st.matrix());
  }
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_StencilAssembly)->Arg(33)->Arg(65)->Arg(129)->Complexity();

void BM_RegularizedSolve(benchmark::State& state) {
  const auto g = square_grid(static_cast<int>(state.range(0)));
  const GridField bd = oracle_field(g);
  SolverProblem prob{std::make_shared<QuadraticHamiltonian>(2, 1.0), g, bd,
                    0.05, {}};
  for (auto _ : state) {
    auto res = solve_regularized(prob);
    benchmark::DoNotOptimize(res.solution);
  }
}
BENCHMARK(BM_RegularizedSolve)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_BarrierSweep(benchmark::State& state) {
  const auto g = square_grid(static_cast<int>(state.range(0)));
  const auto model = std::make_shared<QuadraticHamiltonian>(2, 1.0);
  const int c = static_cast<int>(state.range(0)) / 2;
  for (auto _ : state) {
    auto bf = control_distance(model, 2.0, 0.0, g, {c, c, 0});
    benchmark::DoNotOptimize(bf.value);
  }
}
BENCHMARK(BM_BarrierSweep)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_LegendreTransform(benchmark::State& state) {
  const SeparablePowerHamiltonian H(2, 4.0, 2.0);
  Eigen::Vector2d q(0.7, -0.4);
  for (auto _ : state) {
    auto L = legendre(H, q);
    benchmark::DoNotOptimize(L.value);
  }
}
BENCHMARK(BM_LegendreTransform);

}  // namespace

BENCHMARK_MAIN();
