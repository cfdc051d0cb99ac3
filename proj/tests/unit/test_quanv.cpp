// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "qviton/error.hpp"
#include "qviton/quanv.hpp"
#include "qviton/verify/gradcheck.hpp"

namespace qviton::quanv {
namespace {

using Td = Tensor<double>;
constexpr double kPi = std::numbers::pi;

struct Fixture {
    ParamStore<double> store;
    Rng rng{42};
    QuanvBranch<double> branch{QuanvConfig{}, store, "quanv", rng};
};

TEST(PatchEncode, MapsToAngleRange) {
    Td map({1, 1, 2, 2}, {0.0, 40.0, -40.0, 0.0});
    const Td a = patch_encode(map, 2);
    ASSERT_EQ(a.shape(), (Shape{1, 1, 4}));
    EXPECT_NEAR(a.data()[0], kPi / 2, 1e-12);
    EXPECT_NEAR(a.data()[1], kPi, 1e-12);
    EXPECT_NEAR(a.data()[2], 0.0, 1e-12);
}

TEST(PatchEncode, PatchCoversTwoByTwoBlock) {
    const std::size_t side = 8;
    Td map({1, 1, side, side});
    for (std::size_t i = 0; i < side * side; ++i) map.data()[i] = static_cast<double>(i);
    const Td p = extract_patches(map, 2);
    ASSERT_EQ(p.shape(), (Shape{1, 16, 4}));
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            const std::size_t patch = r * 4 + c;
            std::vector<double> got(p.data().begin() + patch * 4,
                                    p.data().begin() + patch * 4 + 4);
            const std::vector<double> want{
                static_cast<double>((2 * r) * side + 2 * c),
                static_cast<double>((2 * r) * side + 2 * c + 1),
                static_cast<double>((2 * r + 1) * side + 2 * c),
                static_cast<double>((2 * r + 1) * side + 2 * c + 1)};
            EXPECT_EQ(got, want) << "patch " << r << "," << c;
        }
    }
    const Td back = assemble_patches(p, side, side);
    EXPECT_EQ(std::vector<double>(back.data().begin(), back.data().end()),
              std::vector<double>(map.data().begin(), map.data().end()));
}

TEST(Stem, ProducesEightByEightGrid) {
    Fixture f;
    const Td images = verify::random_tensor({2, 3, 56, 56}, 1, false);
    const Td grid = f.branch.stem(images, RunContext{});
    EXPECT_EQ(grid.shape(), (Shape{2, 64, 8, 8}));
}

TEST(Stem, ZeroImageWithZeroWeightsIsZero) {
    Fixture f;
    for (auto &entry : f.store.parameters()) {
        Td t = entry.tensor;
        for (double &v : t.data()) v = 0.0;
    }
    const Td grid = f.branch.stem(Td({1, 3, 56, 56}), RunContext{});
    for (double v : grid.data()) EXPECT_EQ(v, 0.0);
}

TEST(Stem, RejectsTinyInput) {
    Fixture f;
    EXPECT_THROW((void)f.branch.stem(Td({1, 3, 8, 8}), RunContext{}), DimensionError);
}

TEST(Mixer, UniformWeightsGiveChannelMean) {
    Fixture f;
    Td w = f.branch.mixer().weight;
    Td b = f.branch.mixer().bias;
    for (double &v : w.data()) v = 1.0 / 64.0;
    for (double &v : b.data()) v = 0.0;
    const Td grid = verify::random_tensor({1, 64, 8, 8}, 2, false);
    const Td mixed = f.branch.mix(grid);
    ASSERT_EQ(mixed.shape(), (Shape{1, 1, 8, 8}));
    for (std::size_t p = 0; p < 64; ++p) {
        double mean = 0.0;
        for (std::size_t c = 0; c < 64; ++c) mean += grid.data()[c * 64 + p];
        EXPECT_NEAR(mixed.data()[p], mean / 64.0, 1e-12);
    }
}

TEST(Mixer, OneHotWeightSelectsChannel) {
    Fixture f;
    Td w = f.branch.mixer().weight;
    Td b = f.branch.mixer().bias;
    for (double &v : w.data()) v = 0.0;
    for (double &v : b.data()) v = 0.0;
    w.data()[17] = 1.0;
    const Td grid = verify::random_tensor({1, 64, 8, 8}, 3, false);
    const Td mixed = f.branch.mix(grid);
    for (std::size_t p = 0; p < 64; ++p) {
        EXPECT_EQ(mixed.data()[p], grid.data()[17 * 64 + p]);
    }
}

TEST(QuantumMap, ShapeAndRange) {
    Fixture f;
    const Td mixed = verify::random_tensor({1, 1, 8, 8}, 4, false, 3.0);
    const Td q = f.branch.quantum_map(mixed);
    ASSERT_EQ(q.shape(), (Shape{1, 1, 4, 4}));
    for (double v : q.data()) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(QuantumMap, MatchesPerPatchCircuit) {
    Fixture f;
    const Td mixed = verify::random_tensor({1, 1, 8, 8}, 5, false);
    const Td q = f.branch.quantum_map(mixed);
    const Td angles = patch_encode(mixed, 2);
    const auto spec = f.branch.circuit_spec();
    for (std::size_t p = 0; p < 16; ++p) {
        const std::vector<double> a(angles.data().begin() + p * 4,
                                    angles.data().begin() + p * 4 + 4);
        EXPECT_NEAR(q.data()[p], quantum::circuit_expectation(spec, a), 1e-12);
    }
}

TEST(Branch, ForwardWidthAndEvaluatorSwap) {
    Fixture f;
    const Td images = verify::random_tensor({2, 3, 56, 56}, 6, false);
    const Td out = f.branch.forward(images, RunContext{});
    EXPECT_EQ(out.shape(), (Shape{2, 64}));

    quantum::reset_circuit_evaluations();
    f.branch.set_evaluator([](const quantum::CircuitSpec &spec, std::span<const double> a,
                              bool with_gradient) {
        quantum::CircuitGradient g;
        g.value = 0.25;
        if (with_gradient) {
            g.d_inputs.assign(a.size(), 0.0);
            g.d_theta.assign(spec.theta.size(), 0.0);
        }
        return g;
    });
    const Td q = f.branch.quantum_map(f.branch.mix(f.branch.stem(images, RunContext{})));
    for (double v : q.data()) EXPECT_EQ(v, 0.25);
    EXPECT_EQ(quantum::circuit_evaluations(), 0u);
}

TEST(Branch, GradientThroughCircuitLayer) {
    Fixture f;
    const Td mixed = verify::random_tensor({1, 1, 4, 4}, 7);
    Td theta = f.branch.theta();
    verify::GradcheckOptions opts;
    opts.tolerance = 1e-5;
    const auto result = verify::gradcheck(
        "quantum_map", {mixed, theta},
        [&] { return verify::random_projection(f.branch.quantum_map(mixed), 8); }, opts);
    EXPECT_TRUE(result.passed()) << result.max_rel_error;
}

} // namespace
} // namespace qviton::quanv
