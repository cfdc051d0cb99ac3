// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include <optional>
#include <vector>

#include <benchmark/benchmark.h>

#include "qviton/model.hpp"
#include "qviton/ops.hpp"
#include "qviton/quantum.hpp"

namespace {

using namespace qviton;

void BM_CircuitExpectation(benchmark::State &state) {
    quantum::CircuitSpec spec;
    spec.theta.assign(spec.n_parameters(), 0.3);
    const std::vector<double> inputs{0.1, 0.7, 1.3, 2.9};
    for (auto _ : state) {
        benchmark::DoNotOptimize(quantum::circuit_expectation(spec, inputs));
    }
}
BENCHMARK(BM_CircuitExpectation);

void BM_ParameterShift(benchmark::State &state) {
    quantum::CircuitSpec spec;
    spec.theta.assign(spec.n_parameters(), 0.3);
    const std::vector<double> inputs{0.1, 0.7, 1.3, 2.9};
    for (auto _ : state) {
        benchmark::DoNotOptimize(quantum::parameter_shift_grad(spec, inputs));
    }
}
BENCHMARK(BM_ParameterShift);

void BM_Conv2dStem(benchmark::State &state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    Tensor<float> x = Tensor<float>::full({1, 3, size, size}, 0.5f);
    Tensor<float> k = Tensor<float>::full({32, 3, 7, 7}, 0.01f);
    NoGradGuard guard;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ops::conv2d(x, k, std::optional<Tensor<float>>{}, 2, 3));
    }
}
BENCHMARK(BM_Conv2dStem)->Arg(56)->Arg(224)->Unit(benchmark::kMillisecond);

void BM_Matmul(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Tensor<float> a = Tensor<float>::full({n, n}, 0.5f);
    Tensor<float> b = Tensor<float>::full({n, n}, 0.25f);
    NoGradGuard guard;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ops::matmul(a, b));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ToyForward(benchmark::State &state) {
    model::ModelConfig config = model::ModelConfig::toy();
    if (state.range(0) == 0) config.mode = model::Mode::Baseline;
    model::HybridModel<float> m(config, 1);
    Tensor<float> images = Tensor<float>::full({16, 3, 56, 56}, 0.1f);
    NoGradGuard guard;
    for (auto _ : state) {
        benchmark::DoNotOptimize(m.forward(images, RunContext{}));
    }
}
BENCHMARK(BM_ToyForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ToyTrainStep(benchmark::State &state) {
    model::HybridModel<float> m(model::ModelConfig::toy(), 1);
    Tensor<float> images = Tensor<float>::full({16, 3, 56, 56}, 0.1f);
    std::vector<int> labels(16, 0);
    Rng rng(2);
    for (auto _ : state) {
        m.params().zero_grad();
        ops::softmax_cross_entropy(m.forward(images, RunContext{true, &rng}),
                                   std::span<const int>(labels))
            .backward();
    }
}
BENCHMARK(BM_ToyTrainStep)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
