// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qviton/data.hpp"
#include "qviton/error.hpp"
#include "qviton/model.hpp"
#include "qviton/quantum.hpp"
#include "qviton/train.hpp"
#include "qviton/verify/oracles.hpp"
#include "qviton/verify/suite.hpp"
#include "qviton_cli/pipeline.hpp"
#include "qviton_cli/run_config.hpp"
#include "test_support.hpp"

namespace {

using namespace qviton;
using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool passed = false;
    std::string detail;
};

quantum::CircuitSpec random_spec(Rng &rng) {
    quantum::CircuitSpec spec;
    spec.theta.resize(spec.n_parameters());
    for (double &t : spec.theta) t = (2.0 * uniform01(rng) - 1.0) * kPi;
    spec.observable_qubit = uniform_index(rng, spec.n_qubits);
    return spec;
}

std::vector<double> random_angles(Rng &rng, std::size_t n) {
    std::vector<double> a(n);
    for (double &v : a) v = uniform01(rng) * kPi;
    return a;
}

Outcome criterion_quantum_oracle() {
    Rng rng(1001);
    std::vector<quantum::CircuitSpec> specs;
    std::vector<std::vector<double>> inputs;
    for (int i = 0; i < 100; ++i) {
        specs.push_back(random_spec(rng));
        inputs.push_back(random_angles(rng, 4));
    }
    const auto start = Clock::now();
    std::vector<quantum::StateVector> states;
    for (int i = 0; i < 100; ++i) states.push_back(quantum::run_circuit(specs[i], inputs[i]));
    const double elapsed = seconds_since(start);

    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto ref = verify::dense_circuit_state(specs[i], inputs[i]);
        for (std::size_t k = 0; k < ref.size(); ++k) {
            worst = std::max(worst, std::abs(states[i].amplitudes()[k] - ref[k]));
        }
        const double ez = quantum::expectation_z(states[i], specs[i].observable_qubit);
        worst = std::max(
            worst, std::abs(ez - verify::dense_expectation_z(ref, 4, specs[i].observable_qubit)));
    }
    std::ostringstream d;
    d << "max deviation " << worst << ", statevector time " << elapsed << " s";
    return {worst <= 1e-10 && elapsed < 1.0, d.str()};
}

Outcome criterion_parameter_shift() {
    Rng rng(2002);
    const double h = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        quantum::CircuitSpec spec = random_spec(rng);
        auto inputs = random_angles(rng, 4);
        const auto g = quantum::parameter_shift_grad(spec, inputs);
        for (std::size_t i = 0; i < spec.theta.size(); ++i) {
            const double t0 = spec.theta[i];
            spec.theta[i] = t0 + h;
            const double up = quantum::circuit_expectation(spec, inputs);
            spec.theta[i] = t0 - h;
            const double down = quantum::circuit_expectation(spec, inputs);
            spec.theta[i] = t0;
            worst = std::max(worst, std::abs(g.d_theta[i] - (up - down) / (2 * h)));
        }
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const double a0 = inputs[i];
            inputs[i] = a0 + h;
            const double up = quantum::circuit_expectation(spec, inputs);
            inputs[i] = a0 - h;
            const double down = quantum::circuit_expectation(spec, inputs);
            inputs[i] = a0;
            worst = std::max(worst, std::abs(g.d_inputs[i] - (up - down) / (2 * h)));
        }
    }
    double single = 0.0;
    quantum::CircuitSpec one;
    one.n_qubits = 1;
    one.n_layers = 1;
    const std::vector<double> zero{0.0};
    for (int i = 0; i < 50; ++i) {
        const double theta = (2.0 * uniform01(rng) - 1.0) * kPi;
        one.theta = {theta};
        const auto g = quantum::parameter_shift_grad(one, zero);
        single = std::max(single, std::abs(g.d_theta[0] + std::sin(theta)));
    }
    std::ostringstream d;
    d << "max |shift - fd| " << worst << " (tol 1e-5), single-qubit |g + sin| " << single
      << " (tol 1e-12)";
    return {worst <= 1e-5 && single <= 1e-12, d.str()};
}

Outcome criterion_gradcheck() {
    const auto start = Clock::now();
    auto checks = verify::numerics_checks(0);
    const auto model = verify::model_checks(0);
    checks.insert(checks.end(), model.begin(), model.end());
    const double elapsed = seconds_since(start);
    double worst = 0.0;
    std::string worst_name;
    bool ok = true;
    for (const auto &c : checks) {
        if (!c.passed() || c.error > 1e-5 || !c.detail.empty()) {
            ok = false;
            std::cout << "    failing check " << c.scope << "/" << c.name << ": " << c.error
                      << " " << c.detail << "\n";
        }
        if (c.error >= worst) {
            worst = c.error;
            worst_name = c.name;
        }
    }
    std::ostringstream d;
    d << checks.size() << " checks, worst " << worst_name << " " << worst << ", " << elapsed
      << " s";
    return {ok && elapsed < 60.0, d.str()};
}

Outcome criterion_paper_shapes() {
    const model::ModelConfig config = model::ModelConfig::paper();
    model::HybridModel<float> m(config, 7);
    std::size_t vit_params = 0;
    for (const auto &e : m.params().parameters()) {
        if (e.name.rfind("vit.", 0) == 0) vit_params += e.tensor.numel();
    }
    Rng rng(8);
    Tensor<float> image({1, 3, 224, 224});
    for (float &v : image.data()) v = static_cast<float>(standard_normal(rng));

    NoGradGuard guard;
    const RunContext ctx{};
    auto &q = *m.quanv();
    const auto qmap = q.quantum_map(q.mix(q.stem(image, ctx)));
    const auto qfeat = q.head(qmap);
    const auto vfeat = m.vit().forward(image, ctx);
    const auto fused = model::fuse(qfeat, vfeat);
    const auto logits = m.classify(fused, ctx);

    const double rel = std::abs(static_cast<double>(vit_params) - 304e6) / 304e6;
    const bool ok = qfeat.shape() == Shape{1, 64} && vfeat.shape() == Shape{1, 1024} &&
                    fused.shape() == Shape{1, 1088} && logits.shape() == Shape{1, 2} &&
                    qmap.shape() == Shape{1, 1, 4, 4} &&
                    vit_params == config.vit.parameter_count() && rel <= 0.05;
    std::ostringstream d;
    d << "quantum " << shape_str(qfeat.shape()) << ", vit " << shape_str(vfeat.shape())
      << ", fused " << shape_str(fused.shape()) << ", logits " << shape_str(logits.shape())
      << ", map " << shape_str(qmap.shape()) << ", vit params " << vit_params << " ("
      << rel * 100 << "% from 304M)";
    return {ok, d.str()};
}

Outcome criterion_f1() {
    struct Row {
        double p, r, f1;
    };
    const Row rows[] = {{0.9418, 0.9781, 0.9596}, {0.9514, 0.8765, 0.9124}, {0.8561, 0.9242, 0.8888}};
    bool ok = true;
    std::ostringstream d;
    for (const auto &row : rows) {
        const double f = train::f1_score(row.p, row.r);
        ok = ok && std::abs(f - row.f1) <= 5e-4;
        d << "F1(" << row.p << ", " << row.r << ")=" << f << " ";
    }
    return {ok, d.str()};
}

// Preprocessed synthetic tiles, alternating labels.
train::LabeledImages synthetic_images(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    data::PreprocessOptions opts;
    opts.size = 56;
    train::LabeledImages out;
    for (std::size_t i = 0; i < n; ++i) {
        const bool flooded = (i % 2) == 1;
        out.images.push_back(data::preprocess_tile(data::synth_tile(64, flooded, rng), opts));
        out.labels.push_back(flooded ? data::kFlooded : data::kNonFlooded);
    }
    return out;
}

train::TrainConfig toy_train_config(std::size_t total_epochs) {
    const auto preset = cli::RunConfig::preset_config("toy");
    train::TrainConfig c = preset.train;
    c.total_epochs = total_epochs;
    return c;
}

double accuracy(model::HybridModel<float> &m, const train::LabeledImages &set) {
    return train::compute_metrics(train::evaluate(m, set, 32)).accuracy;
}

Outcome criterion_overfit() {
    const auto start = Clock::now();
    const auto set = synthetic_images(64, 6006);
    train::TrainConfig c = toy_train_config(200);
    c.augment = false;
    model::HybridModel<float> m(model::ModelConfig::toy(), 6007);
    train::AdamW<float> opt(m.params(), c);
    data::WeightedSampler sampler(set.labels, 6008);
    Rng rng(6009);
    double acc = 0.0;
    std::size_t epoch = 0;
    for (; epoch < c.total_epochs; ++epoch) {
        train::train_epoch(m, opt, set, sampler, rng, c, epoch);
        acc = accuracy(m, set);
        if (acc >= 0.95) break;
    }
    const double elapsed = seconds_since(start);
    std::ostringstream d;
    d << "train accuracy " << acc << " after " << epoch + 1 << " epochs, " << elapsed << " s";
    return {acc >= 0.95 && elapsed < 300.0, d.str()};
}

struct FitResult {
    double accuracy = 0.0;
    double first_loss = 0.0;
    double last_loss = 0.0;
    bool finite = true;
};

FitResult fit(model::Mode mode, const train::LabeledImages &train_set,
              const train::LabeledImages &held_out) {
    train::TrainConfig c = toy_train_config(30);
    model::ModelConfig mc = model::ModelConfig::toy();
    mc.mode = mode;
    model::HybridModel<float> m(mc, 7001);
    train::AdamW<float> opt(m.params(), c);
    data::WeightedSampler sampler(train_set.labels, 7002);
    Rng rng(7003);
    FitResult r;
    for (std::size_t epoch = 0; epoch < c.total_epochs; ++epoch) {
        double loss = 0.0;
        try {
            loss = train::train_epoch(m, opt, train_set, sampler, rng, c, epoch).mean_loss;
        } catch (const NumericalError &) {
            r.finite = false;
            return r;
        }
        if (epoch == 0) r.first_loss = loss;
        r.last_loss = loss;
        r.finite = r.finite && std::isfinite(loss);
    }
    r.accuracy = accuracy(m, held_out);
    return r;
}

Outcome criterion_generalization() {
    const auto train_set = synthetic_images(200, 7101);
    const auto held_out = synthetic_images(50, 7102);
    const auto start = Clock::now();
    const FitResult hybrid = fit(model::Mode::Hybrid, train_set, held_out);
    const FitResult baseline = fit(model::Mode::Baseline, train_set, held_out);
    const bool baseline_ok = baseline.finite && baseline.last_loss < baseline.first_loss;
    std::ostringstream d;
    d << "hybrid held-out accuracy " << hybrid.accuracy << " (loss " << hybrid.first_loss
      << " -> " << hybrid.last_loss << "), baseline held-out accuracy " << baseline.accuracy
      << " (loss " << baseline.first_loss << " -> " << baseline.last_loss << "), "
      << seconds_since(start) << " s";
    return {hybrid.finite && hybrid.accuracy >= 0.90 && baseline_ok, d.str()};
}

Outcome criterion_sampler() {
    std::vector<int> labels(1000, data::kNonFlooded);
    std::fill(labels.begin(), labels.begin() + 100, data::kFlooded);
    double flooded_share = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        data::WeightedSampler s(labels, seed);
        std::size_t flooded = 0;
        for (int i = 0; i < 10000; ++i) flooded += labels[s.next()] == data::kFlooded ? 1 : 0;
        flooded_share += static_cast<double>(flooded) / 10000.0 / 5.0;
    }
    std::ostringstream d;
    d << "flooded share " << flooded_share << ", non-flooded share " << 1.0 - flooded_share;
    return {std::abs(flooded_share - 0.5) <= 0.02, d.str()};
}

Outcome criterion_schedule() {
    const double lr_max = 1e-4;
    const std::size_t W = 5, T = 50;
    const auto formula = [&](double e) {
        return e < W ? lr_max * (e + 1.0) / W
                     : lr_max * 0.5 * (1.0 + std::cos(kPi * (e - W) / static_cast<double>(T - W)));
    };
    double worst = 0.0;
    for (double e : {0.0, 1.0, 4.0, 5.0, (T + 5) / 2.0, T - 1.0}) {
        worst = std::max(worst, std::abs(train::lr_schedule(e, W, T, lr_max) - formula(e)));
    }
    const double jump = std::abs(train::lr_schedule(4.0, W, T, lr_max) -
                                 train::lr_schedule(5.0, W, T, lr_max));
    std::ostringstream d;
    d << "max deviation " << worst << ", |lr(4) - lr(5)| " << jump;
    return {worst <= 1e-9 && jump <= 1e-12, d.str()};
}

cli::RunConfig determinism_config(const std::filesystem::path &data,
                                  const std::filesystem::path &out) {
    cli::RunConfig c = cli::RunConfig::preset_config("toy");
    c.seed = 11;
    c.workers = 1;
    c.data.root = data.string();
    c.data.granularity = data::SplitGranularity::Tile;
    c.train.total_epochs = 4;
    c.train.warmup_epochs = 1;
    c.output.dir = out.string();
    c.output.checkpoint_every = 0;
    return c;
}

Outcome criterion_determinism() {
    qviton::testing::TempDir dir("acceptance_determinism");
    data::synth_generate({6, 8, 64, 12}, dir / "data");
    std::ostringstream log;
    cli::run_training(determinism_config(dir / "data", dir / "a"), {}, log);
    cli::run_training(determinism_config(dir / "data", dir / "b"), {}, log);
    const auto a = qviton::testing::read_bytes(dir / "a" / "metrics.csv");
    const auto b = qviton::testing::read_bytes(dir / "b" / "metrics.csv");

    const auto resumed_cfg = determinism_config(dir / "data", dir / "c");
    cli::TrainOptions first;
    first.stop_after = 2;
    cli::run_training(resumed_cfg, first, log);
    cli::TrainOptions second;
    second.resume = dir / "c" / "ckpt_last.qvck";
    cli::run_training(resumed_cfg, second, log);
    const auto c = qviton::testing::read_bytes(dir / "c" / "metrics.csv");

    std::ostringstream d;
    d << "identical CSVs: " << (a == b ? "yes" : "no") << ", resumed CSV matches: "
      << (a == c ? "yes" : "no") << " (" << a.size() << " bytes)";
    return {!a.empty() && a == b && a == c, d.str()};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char *name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "statevector matches dense oracle", criterion_quantum_oracle},
        {2, "parameter shift matches finite differences", criterion_parameter_shift},
        {3, "gradcheck of classical ops and toy hybrid", criterion_gradcheck},
        {4, "paper-preset shapes", criterion_paper_shapes},
        {5, "F1 reproduction", criterion_f1},
        {6, "toy hybrid overfits 64 samples", criterion_overfit},
        {7, "toy hybrid generalizes to held-out tiles", criterion_generalization},
        {8, "weighted sampler balance", criterion_sampler},
        {9, "warmup-cosine schedule", criterion_schedule},
        {10, "determinism and resume", criterion_determinism},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        Outcome o;
        const auto start = Clock::now();
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.passed ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": "
                  << o.detail << " [" << seconds_since(start) << " s]" << std::endl;
        failures += o.passed ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
