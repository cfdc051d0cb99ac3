// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qviton/error.hpp"
#include "qviton/model.hpp"
#include "qviton/verify/gradcheck.hpp"

namespace qviton::model {
namespace {

using Tf = Tensor<float>;
using Td = Tensor<double>;

Tf random_images(std::size_t batch, std::uint64_t seed) {
    const Td d = verify::random_tensor({batch, 3, 56, 56}, seed, false);
    Tf f(d.shape());
    for (std::size_t i = 0; i < d.numel(); ++i) f.data()[i] = static_cast<float>(d.data()[i]);
    return f;
}

TEST(Config, FusedWidths) {
    EXPECT_EQ(ModelConfig::paper().fused_width(), 1088u);
    EXPECT_EQ(ModelConfig::toy().fused_width(), 128u);
    ModelConfig baseline = ModelConfig::toy();
    baseline.mode = Mode::Baseline;
    EXPECT_EQ(baseline.fused_width(), 64u);
}

TEST(Config, ModeNames) {
    EXPECT_EQ(mode_from_string(to_string(Mode::Baseline)), Mode::Baseline);
    EXPECT_EQ(mode_from_string("hybrid"), Mode::Hybrid);
    EXPECT_THROW((void)mode_from_string("quantum"), ConfigError);
}

TEST(Fuse, QuantumFeaturesFirst) {
    Td q({1, 64});
    const Td v = verify::random_tensor({1, 1024}, 1, false);
    const Td f = fuse(q, v);
    ASSERT_EQ(f.shape(), (Shape{1, 1088}));
    for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(f.data()[i], 0.0);
    for (std::size_t i = 0; i < 1024; ++i) EXPECT_EQ(f.data()[64 + i], v.data()[i]);
    EXPECT_EQ(fuse(Td({2, 64}), Td({2, 64})).shape(), (Shape{2, 128}));
    EXPECT_THROW((void)fuse(Td({2, 64}), Td({3, 64})), DimensionError);
}

TEST(Model, LogitsAreTwoWide) {
    HybridModel<float> m(ModelConfig::toy(), 3);
    const Tf logits = m.forward(random_images(2, 4), RunContext{});
    EXPECT_EQ(logits.shape(), (Shape{2, 2}));
}

TEST(Model, EvalRunsAreBitIdentical) {
    HybridModel<float> m(ModelConfig::toy(), 5);
    const Tf images = random_images(2, 6);
    NoGradGuard guard;
    const Tf a = m.forward(images, RunContext{});
    const Tf b = m.forward(images, RunContext{});
    for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
}

TEST(Model, BaselineNeverEvaluatesCircuits) {
    ModelConfig config = ModelConfig::toy();
    config.mode = Mode::Baseline;
    HybridModel<float> m(config, 7);
    EXPECT_EQ(m.quanv(), nullptr);
    quantum::reset_circuit_evaluations();
    const Tf logits = m.forward(random_images(2, 8), RunContext{});
    EXPECT_EQ(logits.shape(), (Shape{2, 2}));
    EXPECT_EQ(quantum::circuit_evaluations(), 0u);
}

TEST(Model, HybridEvaluatesOneCircuitPerPatch) {
    HybridModel<float> m(ModelConfig::toy(), 9);
    quantum::reset_circuit_evaluations();
    NoGradGuard guard;
    (void)m.forward(random_images(2, 10), RunContext{});
    EXPECT_EQ(quantum::circuit_evaluations(), 2u * 16u);
}

TEST(Model, ForwardBackwardGivesFiniteGradients) {
    HybridModel<float> m(ModelConfig::toy(), 11);
    Rng rng(12);
    RunContext ctx{true, &rng};
    m.params().zero_grad();
    const std::vector<int> labels{0, 1, 1};
    ops::softmax_cross_entropy(m.forward(random_images(3, 13), ctx), std::span<const int>(labels))
        .backward();
    double total = 0.0;
    for (const auto &entry : m.params().parameters()) {
        for (float g : entry.tensor.grad()) {
            ASSERT_TRUE(std::isfinite(g)) << entry.name;
            total += std::abs(g);
        }
    }
    EXPECT_GT(total, 0.0);
    EXPECT_GT(std::abs(m.quanv()->theta().grad()[0]), 0.0f);
}

TEST(Model, ParameterCountIsStable) {
    HybridModel<float> a(ModelConfig::toy(), 1);
    HybridModel<float> b(ModelConfig::toy(), 2);
    EXPECT_EQ(a.params().parameter_count(), b.params().parameter_count());
    HybridModel<float> c(ModelConfig::toy(), 1);
    ASSERT_EQ(a.params().parameters().size(), c.params().parameters().size());
    for (std::size_t i = 0; i < a.params().parameters().size(); ++i) {
        const auto &pa = a.params().parameters()[i];
        const auto &pc = c.params().parameters()[i];
        EXPECT_EQ(pa.name, pc.name);
        EXPECT_TRUE(std::equal(pa.tensor.data().begin(), pa.tensor.data().end(),
                               pc.tensor.data().begin()));
    }
}

TEST(Model, ClassifierGradcheck) {
    HybridModel<double> m(ModelConfig::toy(), 14);
    const Td fused = verify::random_tensor({2, 128}, 15);
    verify::GradcheckOptions opts;
    opts.tolerance = 1e-5;
    const auto r = verify::gradcheck(
        "classifier", {fused, m.output_layer().weight},
        [&] { return verify::random_projection(m.classify(fused, RunContext{}), 16); }, opts);
    EXPECT_TRUE(r.passed()) << r.max_rel_error;
}

} // namespace
} // namespace qviton::model
