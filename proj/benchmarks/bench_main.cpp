#include <benchmark/benchmark.h>

#include "bubblelab/bubbles.hpp"
#include "bubblelab/hopf.hpp"
#include "bubblelab/potential.hpp"
#include "bubblelab/reduction.hpp"
#include "bubblelab/rng.hpp"

using namespace bubblelab;

static void BM_BubbleLaplacian(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    BubbleParams b = make_bubble(n, 0.3, Point(n, 0.05));
    Point x(n, 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(bubble_laplacian(b, x));
}
BENCHMARK(BM_BubbleLaplacian)->Arg(3)->Arg(6);

static void BM_OctonionProduct(benchmark::State& state) {
    CounterRng rng(1);
    KElement a = random_element(8, rng), b = random_element(8, rng);
    for (auto _ : state) benchmark::DoNotOptimize(k_mul(a, b));
}
BENCHMARK(BM_OctonionProduct);

// Multigrid-preconditioned CG on the ball; the argument is 1/h.
static void BM_PoissonBall(benchmark::State& state) {
    const int n_cells = static_cast<int>(state.range(0));
    GridPtr g = make_grid(Domain::unit_ball(3), 1.0 / n_cells);
    PoissonSolver solver(g, MaskSelector::Omega, 1e-10);
    Vec f = Vec::Ones(static_cast<Eigen::Index>(solver.disc().size()));
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve_source(f));
    state.counters["dofs"] = static_cast<double>(solver.disc().size());
}
BENCHMARK(BM_PoissonBall)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_CorrectionMeridian(benchmark::State& state) {
    PuncturedDomain pd = puncture(symmetry_reduce(Domain::unit_ball(3), SymmetryGroup::orthogonal_last(2)),
                                  {0.0, 0.0}, 0.125);
    GridPtr g = make_grid(pd, 1.0 / 32);
    Reducer r(pd, g, CoefficientField::affine(1.0, {0.5, 0.0, 0.0}), SymmetryGroup::orthogonal_last(2));
    for (auto _ : state) benchmark::DoNotOptimize(r.solve_correction(1.0, {0.0, 0.0, 0.0}));
}
BENCHMARK(BM_CorrectionMeridian)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
