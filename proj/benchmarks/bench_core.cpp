#include "lazymdp/eta_bounds.hpp"
#include "lazymdp/learning.hpp"

#include <benchmark/benchmark.h>

using namespace lazymdp;

namespace {

CompiledGrid load_grid(const char* name) {
    return compile_grid(load_map_file(std::string(LAZYMDP_MAPS_DIR) + "/" + name));
}

void BM_CompileKdt(benchmark::State& state) {
    GridWorldSpec spec = load_map_file(std::string(LAZYMDP_MAPS_DIR) + "/kdt.map");
    for (auto _ : state) {
        CompiledGrid grid = compile_grid(spec);
        benchmark::DoNotOptimize(grid.mdp.n_states);
    }
}
BENCHMARK(BM_CompileKdt);

void BM_ValueIterationKdt(benchmark::State& state) {
    CompiledGrid grid = load_grid("kdt.map");
    for (auto _ : state) {
        QTable q = value_iteration(grid.mdp, 1e-8);
        benchmark::DoNotOptimize(q.data.data());
    }
}
BENCHMARK(BM_ValueIterationKdt);

void BM_SolveLazyKdt(benchmark::State& state) {
    CompiledGrid grid = load_grid("kdt.map");
    LazyMDPSpec spec{grid.mdp, default_uniform(grid), 0.02};
    for (auto _ : state) {
        LazySolution sol = solve_lazy(spec, 1e-8);
        benchmark::DoNotOptimize(sol.residual);
    }
}
BENCHMARK(BM_SolveLazyKdt);

void BM_BuildAugmentedKdt(benchmark::State& state) {
    CompiledGrid grid = load_grid("kdt.map");
    LazyMDPSpec spec{grid.mdp, default_uniform(grid), 0.02};
    for (auto _ : state) {
        TabularMDP aug = build_augmented(spec);
        benchmark::DoNotOptimize(aug.transitions.data());
    }
}
BENCHMARK(BM_BuildAugmentedKdt);

void BM_QLearningPhase(benchmark::State& state) {
    CompiledGrid grid = load_grid("kdt_apple.map");
    LazyMDPSpec spec{grid.mdp, default_uniform(grid), 0.03};
    QLearningConfig config;
    config.gamma = grid.mdp.gamma;
    config.n_phases = 1;
    config.episodes_per_phase = 1000;
    config.max_episode_steps = 1000;
    config.eval_episodes = 0;
    for (auto _ : state) {
        config.seed = static_cast<std::uint64_t>(state.iterations());
        LearningRun run = q_learning_lazy(spec, config);
        benchmark::DoNotOptimize(run.q.data.data());
    }
}
BENCHMARK(BM_QLearningPhase);

void BM_EtaBoundsRnB(benchmark::State& state) {
    CompiledGrid grid = load_grid("rivers_bridges.map");
    StochasticPolicy defaults = default_uniform(grid);
    for (auto _ : state) {
        EtaBounds bounds = compute_eta_bounds(grid.mdp, defaults, 1e-8);
        benchmark::DoNotOptimize(bounds.eta_min);
    }
}
BENCHMARK(BM_EtaBoundsRnB);

}  // namespace

BENCHMARK_MAIN();
