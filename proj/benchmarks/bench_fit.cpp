#include <random>

#include <benchmark/benchmark.h>

#include "mbench/runner.hpp"
#include "mbench/taskgen.hpp"

namespace {

using namespace mbench;

SceneGraph apartment()
{
    static SceneGraph g =
        build_scene_graph(load_scene_file(bundled_data_path("scenes/apartment.json")));
    return g;
}

void BM_MaxInscribedFit(benchmark::State& state)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ext(0.05, 1.5);
    std::vector<std::pair<Footprint, Region>> cases;
    for (int i = 0; i < 64; ++i) {
        Region region;
        for (int k = 0; k < 3; ++k) {
            double x = ext(rng), y = ext(rng);
            region.rects.push_back(Rect{x, y, x + ext(rng), y + ext(rng)});
        }
        cases.emplace_back(Footprint{ext(rng), ext(rng)}, region);
    }
    size_t i = 0;
    for (auto _ : state) {
        const auto& [f, r] = cases[i++ % cases.size()];
        benchmark::DoNotOptimize(max_inscribed_fit(f, r, kFitMargin));
    }
}
BENCHMARK(BM_MaxInscribedFit);

void BM_DeriveAtomicActions(benchmark::State& state)
{
    SceneGraph g = apartment();
    for (auto _ : state)
        benchmark::DoNotOptimize(derive_atomic_actions(g));
}
BENCHMARK(BM_DeriveAtomicActions);

void BM_SampleProcessTasks(benchmark::State& state)
{
    SceneGraph g = apartment();
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_process_tasks(g, 50, 1, {}, 3));
}
BENCHMARK(BM_SampleProcessTasks);

}  // namespace

BENCHMARK_MAIN();
