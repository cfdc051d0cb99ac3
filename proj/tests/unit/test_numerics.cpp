// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "qviton/error.hpp"
#include "qviton/ops.hpp"
#include "qviton/param_store.hpp"
#include "qviton/verify/gradcheck.hpp"
#include "qviton/verify/oracles.hpp"

namespace qviton {
namespace {

using Td = Tensor<double>;
using ops::conv2d;

Td ones(Shape shape) { return Td::full(std::move(shape), 1.0); }

TEST(Tensor, RejectsDataLengthMismatch) {
    EXPECT_THROW(Td({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
}

TEST(Tensor, ReshapeKeepsValuesAndChecksSize) {
    Td t({2, 3}, {1, 2, 3, 4, 5, 6});
    const Td r = t.reshape({3, 2});
    EXPECT_EQ(r.dim(0), 3u);
    EXPECT_EQ(r.data()[5], 6.0);
    EXPECT_THROW((void)t.reshape({4}), DimensionError);
    EXPECT_THROW((void)t.dim(2), IndexError);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
    Td a({2, 2}, {1, 2, 3, 4});
    Td eye({2, 2}, {1, 0, 0, 1});
    const Td c = ops::matmul(a, eye);
    EXPECT_EQ(std::vector<double>(c.data().begin(), c.data().end()),
              (std::vector<double>{1, 2, 3, 4}));
}

TEST(Matmul, RowTimesColumn) {
    Td a({1, 2}, {1, 2});
    Td b({2, 1}, {3, 4});
    const Td c = ops::matmul(a, b);
    ASSERT_EQ(c.shape(), (Shape{1, 1}));
    EXPECT_DOUBLE_EQ(c.item(), 11.0);
}

TEST(Matmul, InnerMismatchNamesBothShapes) {
    Td a({2, 3});
    Td b({2, 3});
    try {
        (void)ops::matmul(a, b);
        FAIL() << "expected DimensionError";
    } catch (const DimensionError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find(shape_str(a.shape())), std::string::npos) << msg;
        EXPECT_NE(msg.find(shape_str(a.shape()) + " and " + shape_str(b.shape())), std::string::npos) << msg;
    }
}

TEST(Matmul, MatchesNaiveOracle) {
    const Td a = verify::random_tensor({5, 7}, 1, false);
    const Td b = verify::random_tensor({7, 3}, 2, false);
    const Td c = ops::matmul(a, b);
    const auto ref = verify::naive_matmul(a.data(), b.data(), 5, 7, 3);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_NEAR(c.data()[i], ref[i], 1e-12);
    }
}

TEST(Conv2d, OneByOneIdentityKernel) {
    const Td x = verify::random_tensor({1, 1, 4, 4}, 3, false);
    const Td y = conv2d(x, ones({1, 1, 1, 1}), std::optional<Td>{}, 1, 0);
    ASSERT_EQ(y.shape(), x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) {
        EXPECT_EQ(y.data()[i], x.data()[i]);
    }
}

TEST(Conv2d, OnesKernelSumsWindow) {
    Td x({1, 1, 2, 2}, {1, 2, 3, 4});
    const Td y = conv2d(x, ones({1, 1, 2, 2}), std::optional<Td>{}, 1, 0);
    ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
    EXPECT_DOUBLE_EQ(y.item(), 10.0);
}

TEST(Conv2d, StemGeometry) {
    Tensor<float> x({1, 3, 224, 224});
    Tensor<float> k({32, 3, 7, 7});
    const auto y = ops::conv2d(x, k, std::optional<Tensor<float>>{}, 2, 3);
    EXPECT_EQ(y.shape(), (Shape{1, 32, 112, 112}));
}

TEST(Conv2d, OversizedKernelIsDimensionError) {
    Td x({1, 1, 3, 3});
    EXPECT_THROW((void)conv2d(x, ones({1, 1, 5, 5}), std::optional<Td>{}, 1, 0), DimensionError);
    EXPECT_THROW((void)ops::conv_output_extent(3, 5, 1, 0), DimensionError);
}

TEST(Conv2d, MatchesNaiveOracle) {
    const Td x = verify::random_tensor({2, 3, 9, 8}, 4, false);
    const Td k = verify::random_tensor({4, 3, 3, 3}, 5, false);
    const Td b = verify::random_tensor({4}, 6, false);
    const Td y = conv2d(x, k, std::optional<Td>{b}, 2, 1);
    const auto ref =
        verify::naive_conv2d(x.data(), 2, 3, 9, 8, k.data(), 4, 3, b.data(), 2, 1);
    ASSERT_EQ(ref.size(), y.numel());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_NEAR(y.data()[i], ref[i], 1e-12);
    }
}

TEST(LayerNorm, ConstantRowGivesZeros) {
    Td x({1, 4}, {3, 3, 3, 3});
    const Td y = ops::layer_norm(x, ones({4}), Td({4}), 1e-5);
    for (double v : y.data()) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(LayerNorm, TwoValuesMapToMinusOnePlusOne) {
    Td x({1, 2}, {1, 3});
    const Td y = ops::layer_norm(x, ones({2}), Td({2}), 1e-12);
    EXPECT_NEAR(y.data()[0], -1.0, 1e-9);
    EXPECT_NEAR(y.data()[1], 1.0, 1e-9);
}

TEST(LayerNorm, RowsAreStandardized) {
    const Td x = verify::random_tensor({8, 32}, 7, false, 10.0);
    const Td y = ops::layer_norm(x, ones({32}), Td({32}), 1e-5);
    for (std::size_t r = 0; r < 8; ++r) {
        double mean = 0.0, var = 0.0;
        for (std::size_t c = 0; c < 32; ++c) mean += y.data()[r * 32 + c];
        mean /= 32;
        for (std::size_t c = 0; c < 32; ++c) {
            const double d = y.data()[r * 32 + c] - mean;
            var += d * d;
        }
        var /= 32;
        EXPECT_LE(std::abs(mean), 1e-9);
        EXPECT_LE(std::abs(var - 1.0), 1e-6);
    }
}

TEST(Gelu, ReferencePoints) {
    Td x({3}, {0.0, 10.0, 1.0});
    const Td y = ops::gelu(x);
    EXPECT_EQ(y.data()[0], 0.0);
    EXPECT_NEAR(y.data()[1], 10.0, 1e-6);
    EXPECT_NEAR(y.data()[2], 0.841345, 1e-5);
}

TEST(Gelu, MatchesSeriesReference) {
    for (double v = -5.0; v <= 5.0; v += 0.25) {
        const Td y = ops::gelu(Td({1}, std::vector<double>{v}));
        EXPECT_NEAR(y.item(), verify::gelu_reference(v), 1e-12) << v;
    }
}

TEST(CrossEntropy, EqualLogitsGiveLogTwo) {
    Td logits({1, 2}, {0.3, 0.3});
    const int label = 1;
    EXPECT_NEAR(ops::softmax_cross_entropy(logits, std::span<const int>(&label, 1)).item(),
                std::numbers::ln2, 1e-12);
}

TEST(CrossEntropy, LargeMarginIsStable) {
    Td logits({1, 2}, {1e4, 0.0});
    const int label = 0;
    const double loss =
        ops::softmax_cross_entropy(logits, std::span<const int>(&label, 1)).item();
    EXPECT_TRUE(std::isfinite(loss));
    EXPECT_LT(loss, 1e-6);
}

TEST(CrossEntropy, KnownValue) {
    Td logits({1, 2}, {1.0, 0.0});
    const int label = 0;
    EXPECT_NEAR(ops::softmax_cross_entropy(logits, std::span<const int>(&label, 1)).item(),
                0.313262, 1e-6);
}

TEST(CrossEntropy, BadLabelIsIndexError) {
    Td logits({1, 2}, {1.0, 0.0});
    const int label = 2;
    EXPECT_THROW((void)ops::softmax_cross_entropy(logits, std::span<const int>(&label, 1)),
                 IndexError);
}

TEST(Softmax, RowsSumToOne) {
    const Td p = ops::softmax(verify::random_tensor({4, 6}, 8, false, 5.0));
    for (std::size_t r = 0; r < 4; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 6; ++c) s += p.data()[r * 6 + c];
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Backward, SumOfSquares) {
    Td x({3}, {1.0, -2.0, 0.5}, true);
    ops::sum(ops::mul(x, x)).backward();
    EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()),
              (std::vector<double>{2.0, -4.0, 1.0}));
}

TEST(Backward, SecondPassAccumulates) {
    Td x({2}, {1.5, -1.0}, true);
    const Td loss = ops::sum(ops::mul(x, x));
    loss.backward();
    loss.backward();
    EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
    EXPECT_DOUBLE_EQ(x.grad()[1], -4.0);
}

TEST(Backward, NonScalarIsContractError) {
    Td x({2}, {1.0, 2.0}, true);
    EXPECT_THROW(ops::mul(x, x).backward(), ContractError);
}

TEST(Backward, UnreachableParameterGetsZero) {
    ParamStore<double> store;
    Td used = store.add_parameter("used", Td({2}, {1.0, 2.0}, true));
    Td unused = store.add_parameter("unused", Td({2}, {3.0, 4.0}, true));
    store.zero_grad();
    ops::sum(used).backward();
    EXPECT_EQ(unused.grad().size(), 2u);
    EXPECT_EQ(unused.grad()[0], 0.0);
    EXPECT_EQ(unused.grad()[1], 0.0);
    EXPECT_EQ(used.grad()[0], 1.0);
}

TEST(NoGrad, ResultsAreOffTape) {
    Td x({2}, {1.0, 2.0}, true);
    NoGradGuard guard;
    const Td y = ops::sum(ops::mul(x, x));
    EXPECT_FALSE(y.requires_grad());
}

TEST(Dropout, EvalIsIdentity) {
    Rng rng(1);
    const Td x = verify::random_tensor({3, 3}, 9, false);
    EXPECT_TRUE(ops::dropout(x, 0.5, false, rng).same_node(x));
}

TEST(Dropout, TrainingPreservesExpectation) {
    Rng rng(2);
    const Td x = Td::full({20000}, 1.0);
    const Td y = ops::dropout(x, 0.5, true, rng);
    double s = 0.0;
    for (double v : y.data()) s += v;
    EXPECT_NEAR(s / 20000.0, 1.0, 0.03);
}

TEST(AdaptivePool, AveragesBins) {
    Td x({1, 1, 4, 4}, {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4});
    const Td y = ops::adaptive_avg_pool2d(x, 2, 2);
    EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()),
              (std::vector<double>{1, 2, 3, 4}));
}

TEST(Concat, JoinsAlongAxisAndChecksShapes) {
    Td a({2, 1}, {1, 2});
    Td b({2, 2}, {3, 4, 5, 6});
    const Td c = ops::concat<double>({a, b}, 1);
    EXPECT_EQ(std::vector<double>(c.data().begin(), c.data().end()),
              (std::vector<double>{1, 3, 4, 2, 5, 6}));
    EXPECT_THROW((void)ops::concat<double>({a, Td({3, 1})}, 1), DimensionError);
}

TEST(Gradcheck, ClassicalOpsPass) {
    verify::GradcheckOptions opts;
    opts.tolerance = 1e-5;
    const Td a = verify::random_tensor({3, 4}, 11);
    const Td b = verify::random_tensor({4, 5}, 12);
    EXPECT_TRUE(verify::gradcheck(
                    "matmul", {a, b},
                    [&] { return verify::random_projection(ops::matmul(a, b), 13); }, opts)
                    .passed());

    const Td x = verify::random_tensor({2, 2, 6, 6}, 14);
    const Td k = verify::random_tensor({3, 2, 3, 3}, 15);
    const Td bias = verify::random_tensor({3}, 16);
    EXPECT_TRUE(verify::gradcheck("conv2d", {x, k, bias},
                                  [&] {
                                      return verify::random_projection(
                                          conv2d(x, k, std::optional<Td>{bias}, 2, 1), 17);
                                  },
                                  opts)
                    .passed());

    const Td h = verify::random_tensor({3, 8}, 18);
    const Td g = verify::random_tensor({8}, 19);
    const Td be = verify::random_tensor({8}, 20);
    EXPECT_TRUE(verify::gradcheck("layer_norm_gelu", {h, g, be},
                                  [&] {
                                      return verify::random_projection(
                                          ops::gelu(ops::layer_norm(h, g, be, 1e-5)), 21);
                                  },
                                  opts)
                    .passed());
}

} // namespace
} // namespace qviton
