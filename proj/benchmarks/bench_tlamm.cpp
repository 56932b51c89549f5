#include <benchmark/benchmark.h>

#include <tlamm/cox_model.hpp>
#include <tlamm/evaluation.hpp>
#include <tlamm/lamm_solver.hpp>

using namespace tlamm;

namespace {

SimulatedData bench_data(Index n, Index p)
{
    SimulationConfig c;
    c.n = n;
    c.p = p;
    c.seed = 7;
    return simulate_dataset(c);
}

void BM_CoxGradient(benchmark::State& state)
{
    const auto sim = bench_data(state.range(0), state.range(1));
    const CoxObjective cox(sim.dataset);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cox.value_and_gradient(sim.true_beta));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_CoxGradient)->Args({300, 100})->Args({300, 2400})->Args({1000, 2400});

void BM_TlammFit(benchmark::State& state)
{
    const auto sim = bench_data(300, state.range(0));
    const CoxObjective cox(sim.dataset);
    const auto spec = PenaltySpec::scad(lambda_from_c(0.7, 300, state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_tlamm(cox, spec, SolverConfig{}));
    }
}
BENCHMARK(BM_TlammFit)->Arg(500)->Arg(2400)->Unit(benchmark::kMillisecond);

void BM_IlammFit(benchmark::State& state)
{
    const auto sim = bench_data(300, state.range(0));
    const CoxObjective cox(sim.dataset);
    const auto spec = PenaltySpec::scad(lambda_from_c(0.7, 300, state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_ilamm(cox, spec, SolverConfig{}));
    }
}
BENCHMARK(BM_IlammFit)->Arg(500)->Arg(2400)->Unit(benchmark::kMillisecond);

void BM_Concordance(benchmark::State& state)
{
    const auto sim = bench_data(state.range(0), 20);
    for (auto _ : state) {
        benchmark::DoNotOptimize(concordance_index(sim.true_beta, sim.dataset));
    }
}
BENCHMARK(BM_Concordance)->Arg(300)->Arg(3000);

} // namespace

BENCHMARK_MAIN();
