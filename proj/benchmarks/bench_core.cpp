#include <benchmark/benchmark.h>

#include <vector>

#include "orgnet/data.hpp"
#include "orgnet/organism.hpp"
#include "orgnet/particle.hpp"

using namespace orgnet;

namespace {

OrganismArchitecture organism_shape(bool mnist) {
    OrganismArchitecture a;
    if (mnist) {
        a.layer_sizes = {225, 5, 5, 5, 10};
        a.activation = Activation::Gelu;
    } else {
        a.layer_sizes = {2, 3, 3, 1};
    }
    return a;
}

LabeledDataset random_inputs(std::size_t n, std::size_t in, std::size_t out, Rng& rng) {
    LabeledDataset ds(in, out, Split::Train);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(in);
    std::vector<double> y(out, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = u(rng);
        std::fill(y.begin(), y.end(), 0.0);
        y[i % out] = 1.0;
        ds.push_back(x, y);
    }
    return ds;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
    Rng rng(1);
    const std::size_t width = static_cast<std::size_t>(state.range(0));
    const Network net = init_uniform(NetworkArchitecture({width, width, width, 1}, Activation::Gelu), rng);
    std::vector<double> x(width, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(forward(net, x));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Forward)->Arg(5)->Arg(32)->Arg(225);

static void BM_SelfTrainStep(benchmark::State& state) {
    Rng rng(2);
    auto p = ParticleNetwork::random(default_particle_arch(), rng);
    OptimizerState opt(p.weights().size(), 0.004, 0.9);
    for (auto _ : state) benchmark::DoNotOptimize(self_train_step(p, opt));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SelfTrainStep);

static void BM_ReplicativeApplication(benchmark::State& state) {
    Rng rng(3);
    const auto p = ParticleNetwork::random(default_particle_arch(), rng);
    for (auto _ : state) benchmark::DoNotOptimize(apply_replicative(p, p.net()));
}
BENCHMARK(BM_ReplicativeApplication);

static void BM_OnTaskStep(benchmark::State& state) {
    const bool mnist = state.range(0) != 0;
    Rng rng(4);
    auto on = OrganismNetwork::random(organism_shape(mnist), rng, 0.004, 0.9);
    const auto& na = on.network_arch();
    const auto ds = random_inputs(64, na.input_size(), na.output_size(), rng);
    const auto batch = ds.examples();
    const Loss loss = mnist ? Loss::CrossEntropy : Loss::MeanSquared;
    for (auto _ : state) benchmark::DoNotOptimize(on_task_step(on, batch, loss));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_OnTaskStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_SelfTrainRound(benchmark::State& state) {
    Rng rng(5);
    auto on = OrganismNetwork::random(organism_shape(true), rng, 0.004, 0.9);
    for (auto _ : state) benchmark::DoNotOptimize(self_train_round(on, 1));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(on.size()));
}
BENCHMARK(BM_SelfTrainRound)->Unit(benchmark::kMillisecond);

static void BM_Census(benchmark::State& state) {
    Rng rng(6);
    const auto on = OrganismNetwork::random(organism_shape(true), rng, 0.004, 0.9);
    for (auto _ : state) benchmark::DoNotOptimize(census(on, {}, {}));
}
BENCHMARK(BM_Census)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
