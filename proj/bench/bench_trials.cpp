// Serial reference vs OpenMP runners on the same trial plans.
#include "sparseprov/sim.hpp"

#include <benchmark/benchmark.h>

using namespace sparseprov;

namespace {

TrialPlan learning_plan(Scheme s)
{
    TrialPlan p;
    p.scheme = s;
    p.topology = topology_with_degrees({5, 3, 4, 1, 4, 2, 4, 5}, 1);
    p.ssmp = SsmpParams::equal(8, 32, 4);
    p.m = 224;
    p.k = 4;
    p.trials = 20000;
    p.seed = 1;
    return p;
}

PayloadSweep sweep(EmbedMode mode)
{
    PayloadSweep s;
    s.topology = random_sparse_topology(20, 34, 1);
    s.h = 4;
    s.mode = mode;
    s.m = 20;
    s.ks = {1, 2, 3, 4, 5, 6, 7, 8};
    s.beta_max = 3;
    s.trials = 5000;
    s.seed = 1;
    return s;
}

template <FprEstimate (*Run)(const TrialPlan&)>
void BM_learning(benchmark::State& state)
{
    const auto p = learning_plan(static_cast<Scheme>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(Run(p));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * p.trials));
}

template <PayloadSweepResult (*Run)(const PayloadSweep&)>
void BM_sweep(benchmark::State& state)
{
    const auto s = sweep(static_cast<EmbedMode>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(Run(s));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.trials));
}

} // namespace

BENCHMARK(BM_learning<run_trials_serial>)->Name("ssmp/serial")->Arg(int(Scheme::SSMP))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_learning<run_trials>)->Name("ssmp/openmp")->Arg(int(Scheme::SSMP))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_learning<run_trials_serial>)->Name("mssp/serial")->Arg(int(Scheme::MSSP))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_learning<run_trials>)->Name("mssp/openmp")->Arg(int(Scheme::MSSP))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep<run_payload_sweep_serial>)->Name("sweep_de/serial")->Arg(int(EmbedMode::DE))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep<run_payload_sweep>)->Name("sweep_de/openmp")->Arg(int(EmbedMode::DE))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep<run_payload_sweep_serial>)->Name("sweep_dde/serial")->Arg(int(EmbedMode::DDE))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep<run_payload_sweep>)->Name("sweep_dde/openmp")->Arg(int(EmbedMode::DDE))->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
