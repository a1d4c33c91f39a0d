#include <benchmark/benchmark.h>

#include "hysrl/dp.hpp"
#include "hysrl/envs.hpp"
#include "hysrl/hybrid_vi.hpp"
#include "hysrl/sampling.hpp"
#include "hysrl/shift_id.hpp"

using namespace hysrl;

namespace {

const TabularMDP& gridworld() {
    static const TabularMDP env = build_gridworld(GridWorldSpec::target());
    return env;
}

EmpiricalModel explored(long long episodes) {
    const auto& env = gridworld();
    EmpiricalModel counts(env.dims());
    Rng rng = make_rng(0, 0);
    const auto pi = Policy::uniform(env.dims());
    for (long long e = 0; e < episodes; ++e) counts.update(sample_episode(env, pi, rng, e));
    return counts;
}

void BM_SampleEpisode(benchmark::State& state) {
    const auto& env = gridworld();
    const auto pi = Policy::uniform(env.dims());
    Rng rng = make_rng(1, 0);
    long long e = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_episode(env, pi, rng, e++));
    state.SetItemsProcessed(state.iterations() * env.horizon());
}
BENCHMARK(BM_SampleEpisode);

void BM_OptimalValues(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(optimal_values(gridworld()));
}
BENCHMARK(BM_OptimalValues);

void BM_BackupW(benchmark::State& state) {
    const auto counts = explored(state.range(0));
    const BonusFunctions bonus(gridworld().dims(), 0.1, 1e-6);
    for (auto _ : state) benchmark::DoNotOptimize(backup_W(counts, gridworld().horizon(), bonus));
}
BENCHMARK(BM_BackupW)->Arg(10)->Arg(10'000);

void BM_BackupBoundsAndGap(benchmark::State& state) {
    const auto& env = gridworld();
    HybridModel model = HybridModel::online_only(env.dims());
    Rng rng = make_rng(2, 0);
    const auto pi = Policy::uniform(env.dims());
    for (long long e = 0; e < state.range(0); ++e) model.observe(sample_episode(env, pi, rng, e));
    const BonusFunctions bonus(env.dims(), 0.1, 2e-3);
    for (auto _ : state) {
        auto b = backup_bounds(model, env, bonus);
        benchmark::DoNotOptimize(backup_G(model, b.bounds, b.greedy, bonus));
    }
}
BENCHMARK(BM_BackupBoundsAndGap)->Arg(10)->Arg(10'000);

}  // namespace

BENCHMARK_MAIN();
