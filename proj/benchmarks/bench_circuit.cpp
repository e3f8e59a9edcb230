#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "quditnn/generators.hpp"
#include "quditnn/gradients.hpp"
#include "quditnn/linalg.hpp"
#include "quditnn/metrics.hpp"
#include "quditnn/model.hpp"

using namespace quditnn;

namespace {

struct Fixture {
    GeneratorSet gs;
    ModelParams params;
    FeatureMatrix x;
    std::vector<int> y;

    Fixture(std::size_t d, std::size_t layers, std::size_t rows) : gs(build_generators(d)) {
        const std::size_t features = std::min<std::size_t>(23, d * d - 2);
        params = ModelParams::make(d, layers, features);
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> u(-0.1, 0.1);
        std::normal_distribution<double> z(0.0, 1.0);
        for (Eigen::Index i = 0; i < params.weights.size(); ++i) {
            params.weights.data()[i] = u(rng);
        }
        x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(features));
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x.data()[i] = z(rng);
        }
        for (std::size_t i = 0; i < rows; ++i) {
            y.push_back(static_cast<int>(rng() % 2));
        }
    }

    std::span<const double> row(std::size_t i) const {
        return {x.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(x.cols())};
    }
};

void BM_Eigh(benchmark::State &state) {
    const auto gs = build_generators(static_cast<std::size_t>(state.range(0)));
    ComplexMatrix h = ComplexMatrix::Zero(gs.dim(), gs.dim());
    for (std::size_t s = 0; s < gs.size(); ++s) {
        h += (0.1 * static_cast<double>(s + 1)) * gs[s].matrix;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigh(h));
    }
}
BENCHMARK(BM_Eigh)->Arg(2)->Arg(5)->Arg(8);

void BM_Forward(benchmark::State &state) {
    const Fixture f(5, static_cast<std::size_t>(state.range(0)), 64);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(f.row(i++ % 64), f.params, f.gs));
    }
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(4)->Arg(16);

void BM_SampleGradient(benchmark::State &state) {
    const Fixture f(5, static_cast<std::size_t>(state.range(0)), 64);
    RealMatrix grad = RealMatrix::Zero(f.params.weights.rows(), f.params.weights.cols());
    std::size_t i = 0;
    for (auto _ : state) {
        const std::size_t r = i++ % 64;
        benchmark::DoNotOptimize(accumulate_sample_gradient(f.row(r), f.y[r], f.params, f.gs, ClassWeights{}, grad));
    }
}
BENCHMARK(BM_SampleGradient)->Arg(1)->Arg(4)->Arg(16);

void BM_BatchGradient(benchmark::State &state) {
    const Fixture f(5, 16, 256);
    const BatchRef batch{f.x, f.y};
    const auto threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(loss_gradient(batch, f.params, f.gs, LossConfig{1e-4, {}}, threads));
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_BatchGradient)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

void BM_EditDistance(benchmark::State &state) {
    std::vector<std::size_t> a(23);
    std::vector<std::size_t> b(23);
    for (std::size_t i = 0; i < 23; ++i) {
        a[i] = i;
        b[i] = (i * 7) % 23;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(edit_distance(a, b));
    }
}
BENCHMARK(BM_EditDistance);

} // namespace

BENCHMARK_MAIN();
