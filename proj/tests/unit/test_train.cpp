// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "qviton/error.hpp"
#include "qviton/train.hpp"

namespace qviton::train {
namespace {

using Td = Tensor<double>;

struct Single {
    ParamStore<double> store;
    Td p = store.add_parameter("p", Td({1}, {1.0}, true));
    void set_grad(double g) { p.mutable_grad()[0] = g; }
};

TEST(AdamW, ZeroGradientWithoutDecayLeavesParameters) {
    Single s;
    s.set_grad(0.0);
    AdamW<double> opt(s.store, 0.9, 0.999, 1e-8, 0.0);
    for (int i = 0; i < 5; ++i) opt.step(s.store, 1e-3);
    EXPECT_EQ(s.p.data()[0], 1.0);
}

TEST(AdamW, FirstStepFromUnitGradient) {
    const double lr = 1e-3, eps = 1e-8;
    Single plain;
    plain.set_grad(1.0);
    AdamW<double> a(plain.store, 0.9, 0.999, eps, 0.0);
    a.step(plain.store, lr);
    EXPECT_NEAR(plain.p.data()[0], 1.0 - lr / (1.0 + eps), 1e-15);

    Single decayed;
    decayed.set_grad(1.0);
    AdamW<double> b(decayed.store, 0.9, 0.999, eps, 0.05);
    b.step(decayed.store, lr);
    EXPECT_NEAR(decayed.p.data()[0], 1.0 - lr / (1.0 + eps) - lr * 0.05, 1e-15);
}

TEST(AdamW, ZeroGradientDecaysGeometrically) {
    const double lr = 1e-2, wd = 0.05;
    Single s;
    s.set_grad(0.0);
    AdamW<double> opt(s.store, 0.9, 0.999, 1e-8, wd);
    for (int i = 0; i < 10; ++i) opt.step(s.store, lr);
    EXPECT_NEAR(s.p.data()[0], std::pow(1.0 - lr * wd, 10), 1e-15);
}

TEST(AdamW, WithoutDecayMatchesAdamBitwise) {
    const double lr = 3e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const std::vector<double> grads{0.3, -1.2, 0.05, 2.0, -0.7, 0.0, 1e-4};
    Single s;
    AdamW<double> opt(s.store, b1, b2, eps, 0.0);
    double w = 1.0, m = 0.0, v = 0.0;
    for (std::size_t t = 1; t <= grads.size(); ++t) {
        const double g = grads[t - 1];
        s.set_grad(g);
        opt.step(s.store, lr);
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, static_cast<double>(t)));
        const double vh = v / (1 - std::pow(b2, static_cast<double>(t)));
        w -= lr * mh / (std::sqrt(vh) + eps);
        EXPECT_EQ(s.p.data()[0], w) << "step " << t;
    }
    EXPECT_EQ(opt.steps(), grads.size());
}

TEST(AdamW, NonFiniteGradientNamesParameter) {
    Single s;
    s.set_grad(std::nan(""));
    AdamW<double> opt(s.store, 0.9, 0.999, 1e-8, 0.0);
    try {
        opt.step(s.store, 1e-3);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError &e) {
        EXPECT_NE(std::string(e.what()).find("'p'"), std::string::npos);
    }
}

TEST(Clip, RescalesToMaxNorm) {
    ParamStore<double> store;
    Td a = store.add_parameter("a", Td({2}, {0.0, 0.0}, true));
    a.mutable_grad()[0] = 3.0;
    a.mutable_grad()[1] = 4.0;
    EXPECT_DOUBLE_EQ(clip_grad_norm(store, 1.0), 5.0);
    EXPECT_NEAR(global_grad_norm(store), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(clip_grad_norm(store, 2.0), 1.0);
    EXPECT_NEAR(a.grad()[0], 0.6, 1e-15);
}

TEST(Schedule, KeyPoints) {
    const double lr = 1e-4;
    const std::size_t W = 5, T = 50;
    EXPECT_NEAR(lr_schedule(0.0, W, T, lr), lr / 5, 1e-18);
    EXPECT_NEAR(lr_schedule(4.0, W, T, lr), lr, 1e-18);
    EXPECT_NEAR(lr_schedule(5.0, W, T, lr), lr, 1e-18);
    EXPECT_NEAR(lr_schedule((T + W) / 2.0, W, T, lr), lr / 2, 1e-18);
    double previous = lr_schedule(5.0, W, T, lr);
    for (std::size_t e = 6; e < T; ++e) {
        const double now = lr_schedule(static_cast<double>(e), W, T, lr);
        EXPECT_LE(now, previous);
        previous = now;
    }
    EXPECT_GT(lr_schedule(T - 1.0, W, T, lr), 0.0);
    EXPECT_THROW((void)lr_schedule(static_cast<double>(T), W, T, lr), ContractError);
    EXPECT_THROW((void)lr_schedule(-1.0, W, T, lr), ContractError);
}

TEST(Schedule, PerStepInterpolates) {
    TrainConfig c;
    c.schedule = ScheduleGranularity::Step;
    EXPECT_DOUBLE_EQ(lr_at(c, 0, 0, 4), lr_schedule(0.0, 5, 50, c.lr_max));
    EXPECT_DOUBLE_EQ(lr_at(c, 2, 2, 4), lr_schedule(2.5, 5, 50, c.lr_max));
    c.schedule = ScheduleGranularity::Epoch;
    EXPECT_DOUBLE_EQ(lr_at(c, 2, 2, 4), lr_schedule(2.0, 5, 50, c.lr_max));
}

TEST(Config, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.warmup_epochs = 60;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainConfig{};
    c.lr_max = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

ConfusionMatrix matrix(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    ConfusionMatrix cm;
    cm.tp = tp;
    cm.fp = fp;
    cm.fn = fn;
    cm.tn = tn;
    return cm;
}

TEST(Metrics, PerfectPredictions) {
    const Metrics m = compute_metrics(matrix(5, 0, 0, 7));
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_EQ(m.flooded.precision, 1.0);
    EXPECT_EQ(m.flooded.recall, 1.0);
    EXPECT_EQ(m.flooded.f1, 1.0);
    EXPECT_EQ(m.non_flooded.f1, 1.0);
    EXPECT_EQ(m.macro_f1, 1.0);
}

TEST(Metrics, AllFloodedOnBalancedData) {
    ConfusionMatrix cm;
    for (int i = 0; i < 10; ++i) cm.add(i % 2, 1);
    const Metrics m = compute_metrics(cm);
    EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
    EXPECT_DOUBLE_EQ(m.flooded.recall, 1.0);
    EXPECT_DOUBLE_EQ(m.flooded.precision, 0.5);
    EXPECT_TRUE(m.non_flooded.degenerate);
    EXPECT_EQ(m.non_flooded.f1, 0.0);
}

TEST(Metrics, WorkedExample) {
    const Metrics m = compute_metrics(matrix(3, 1, 2, 4));
    EXPECT_DOUBLE_EQ(m.accuracy, 0.7);
    EXPECT_DOUBLE_EQ(m.flooded.precision, 0.75);
    EXPECT_DOUBLE_EQ(m.flooded.recall, 0.6);
    EXPECT_NEAR(m.flooded.f1, 0.6667, 5e-5);
    EXPECT_EQ(m.flooded.support, 5u);
    EXPECT_EQ(m.non_flooded.support, 5u);
}

TEST(Metrics, EmptyMatrixIsError) {
    EXPECT_THROW((void)compute_metrics(ConfusionMatrix{}), ContractError);
}

TEST(Metrics, F1Score) {
    EXPECT_NEAR(f1_score(0.9418, 0.9781), 0.9596, 5e-4);
    EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

LabeledImages toy_images(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    data::PreprocessOptions opts;
    opts.size = 56;
    LabeledImages out;
    for (std::size_t i = 0; i < n; ++i) {
        const bool flooded = (i % 2) == 1;
        out.images.push_back(data::preprocess_tile(data::synth_tile(64, flooded, rng), opts));
        out.labels.push_back(flooded ? data::kFlooded : data::kNonFlooded);
    }
    return out;
}

TrainConfig toy_train_config() {
    TrainConfig c;
    c.lr_max = 1e-3;
    c.total_epochs = 30;
    c.batch_size = 8;
    return c;
}

EpochLog one_epoch(const LabeledImages &images, std::uint64_t seed, std::vector<float> *weights) {
    model::HybridModel<float> m(model::ModelConfig::toy(), seed);
    const TrainConfig c = toy_train_config();
    AdamW<float> opt(m.params(), c);
    data::WeightedSampler sampler(images.labels, seed + 1);
    Rng rng(seed + 2);
    const EpochLog log = train_epoch(m, opt, images, sampler, rng, c, 0);
    if (weights != nullptr) {
        for (const auto &e : m.params().parameters()) {
            weights->insert(weights->end(), e.tensor.data().begin(), e.tensor.data().end());
        }
    }
    return log;
}

TEST(TrainEpoch, FirstLossNearLogTwoAndDeterministic) {
    const LabeledImages images = toy_images(16, 3);
    std::vector<float> wa, wb;
    const EpochLog a = one_epoch(images, 10, &wa);
    const EpochLog b = one_epoch(images, 10, &wb);
    EXPECT_NEAR(a.mean_loss, std::numbers::ln2, 0.1);
    EXPECT_EQ(a.steps, 2u);
    EXPECT_EQ(a.mean_loss, b.mean_loss);
    EXPECT_EQ(wa, wb);
}

TEST(Evaluate, NeverAugments) {
    const LabeledImages images = toy_images(6, 4);
    model::HybridModel<float> m(model::ModelConfig::toy(), 1);
    data::reset_augment_invocations();
    const ConfusionMatrix cm = evaluate(m, images, 4);
    EXPECT_EQ(cm.total(), 6u);
    EXPECT_EQ(predict(m, images.images, 4).size(), 6u);
    EXPECT_EQ(data::augment_invocations(), 0u);
}

TEST(MakeBatch, StacksSelectedImages) {
    const LabeledImages images = toy_images(3, 5);
    const std::vector<std::size_t> idx{2, 0};
    const Tensor<float> batch = make_batch<float>(images.images, idx);
    ASSERT_EQ(batch.shape(), (Shape{2, 3, 56, 56}));
    EXPECT_EQ(batch.data()[0], images.images[2].pixels[0]);
    EXPECT_EQ(batch.data()[3 * 56 * 56], images.images[0].pixels[0]);
}

} // namespace
} // namespace qviton::train
