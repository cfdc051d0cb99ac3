// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/verify/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "qviton/error.hpp"
#include "qviton/model.hpp"
#include "qviton/ops.hpp"
#include "qviton/quantum.hpp"
#include "qviton/quanv.hpp"
#include "qviton/verify/gradcheck.hpp"
#include "qviton/verify/oracles.hpp"
#include "qviton/vit.hpp"

namespace qviton::verify {

namespace {

using Td = Tensor<double>;
using Clock = std::chrono::steady_clock;

class Recorder {
  public:
    explicit Recorder(std::string scope) : scope_(std::move(scope)) {}

    template <typename F> void check(const std::string &name, double tolerance, F &&body) {
        const auto start = Clock::now();
        double error = 0.0;
        std::string detail;
        try {
            error = body();
        } catch (const std::exception &e) {
            error = INFINITY;
            detail = e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        results_.push_back({scope_, name, error, tolerance, secs, detail});
    }

    void grad(const std::string &name, const std::vector<Td> &inputs,
              const std::function<Td()> &loss, GradcheckOptions options) {
        check(name, options.tolerance,
              [&] { return gradcheck(name, inputs, loss, options).max_rel_error; });
    }

    std::vector<CheckResult> take() { return std::move(results_); }

  private:
    std::string scope_;
    std::vector<CheckResult> results_;
};

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        return INFINITY;
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

double max_abs_diff(const std::vector<Complex> &a, const std::vector<Complex> &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

std::vector<double> random_angles(Rng &rng, std::size_t n, double lo, double hi) {
    std::vector<double> out(n);
    for (double &a : out) {
        a = lo + (hi - lo) * uniform01(rng);
    }
    return out;
}

quantum::CircuitSpec random_spec(Rng &rng, std::size_t n_qubits = 4, std::size_t layers = 2) {
    quantum::CircuitSpec spec;
    spec.n_qubits = n_qubits;
    spec.n_layers = layers;
    spec.theta = random_angles(rng, n_qubits * layers, -std::numbers::pi, std::numbers::pi);
    return spec;
}

// Perturbs every parameter so no gradient path is structurally zero.
void randomize(ParamStore<double> &store, std::uint64_t seed, double scale) {
    Rng rng(seed);
    for (const auto &entry : store.parameters()) {
        Td p = entry.tensor;
        for (double &v : p.data()) {
            v += scale * standard_normal(rng);
        }
    }
}

std::vector<Td> parameter_list(const ParamStore<double> &store) {
    std::vector<Td> out;
    for (const auto &entry : store.parameters()) {
        out.push_back(entry.tensor);
    }
    return out;
}

GradcheckOptions opts(double tolerance, std::uint64_t seed, std::size_t coords = 0,
                      double step = 1e-5) {
    GradcheckOptions o;
    o.tolerance = tolerance;
    o.seed = seed;
    o.max_coordinates = coords;
    o.step = step;
    return o;
}

} // namespace

std::string to_string(Scope scope) {
    switch (scope) {
    case Scope::Numerics:
        return "numerics";
    case Scope::Quantum:
        return "quantum";
    case Scope::Quanv:
        return "quanv";
    case Scope::Vit:
        return "vit";
    case Scope::Model:
        return "model";
    case Scope::All:
        break;
    }
    return "all";
}

Scope scope_from_string(const std::string &name) {
    for (Scope s : {Scope::Numerics, Scope::Quantum, Scope::Quanv, Scope::Vit, Scope::Model,
                    Scope::All}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw ConfigError("unknown scope '" + name +
                      "' (expected numerics, quantum, quanv, vit, model or all)");
}

std::vector<CheckResult> numerics_checks(std::uint64_t seed) {
    Recorder r("numerics");
    const double tol = 1e-6;
    std::uint64_t s = seed * 1000;
    auto next = [&s] { return ++s; };

    {
        const Td a = random_tensor({3, 4}, next()), b = random_tensor({3, 4}, next());
        r.grad("add", {a, b}, [&] { return random_projection(ops::add(a, b), 1); }, opts(tol, s));
        r.grad("sub", {a, b}, [&] { return random_projection(ops::sub(a, b), 2); }, opts(tol, s));
        r.grad("mul", {a, b}, [&] { return random_projection(ops::mul(a, b), 3); }, opts(tol, s));
        r.grad("scale", {a}, [&] { return random_projection(ops::scale(a, 1.7), 4); },
               opts(tol, s));
        r.grad("sum", {a}, [&] { return ops::sum(a); }, opts(tol, s));
        r.grad("mean", {a}, [&] { return ops::mean(a); }, opts(tol, s));
        r.grad("reshape", {a}, [&] { return random_projection(a.reshape({4, 3}), 5); },
               opts(tol, s));
    }
    {
        const Td x = random_tensor({2, 3, 4}, next()), row = random_tensor({4}, next()),
                 block = random_tensor({3, 4}, next());
        r.grad("add_broadcast_row", {x, row},
               [&] { return random_projection(ops::add_broadcast(x, row), 6); }, opts(tol, s));
        r.grad("add_broadcast_block", {x, block},
               [&] { return random_projection(ops::add_broadcast(x, block), 7); }, opts(tol, s));
        r.grad("transpose12", {x}, [&] { return random_projection(ops::transpose12(x), 8); },
               opts(tol, s));
        r.grad("select_token", {x}, [&] { return random_projection(ops::select_token(x, 1), 9); },
               opts(tol, s));
        r.grad("softmax", {x}, [&] { return random_projection(ops::softmax(x), 10); },
               opts(tol, s));
        const Td one = random_tensor({1, 3, 4}, next());
        r.grad("repeat_batch", {one},
               [&] { return random_projection(ops::repeat_batch(one, 3), 11); }, opts(tol, s));
        r.grad("concat_axis1", {x, one},
               [&] {
                   return random_projection(ops::concat<double>({x, ops::repeat_batch(one, 2)}, 1),
                                            12);
               },
               opts(tol, s));
        r.grad("concat_axis2", {x},
               [&] { return random_projection(ops::concat<double>({x, x}, 2), 13); },
               opts(tol, s));
        r.grad("flatten", {x}, [&] { return random_projection(ops::flatten(x, 1), 14); },
               opts(tol, s));
    }
    {
        const Td a = random_tensor({3, 5}, next()), b = random_tensor({5, 4}, next());
        r.grad("matmul", {a, b}, [&] { return random_projection(ops::matmul(a, b), 15); },
               opts(tol, s));
        r.check("matmul_vs_naive", 1e-12, [&] {
            return max_abs_diff(ops::matmul(a, b).data(), naive_matmul(a.data(), b.data(), 3, 5, 4));
        });
        const Td x = random_tensor({2, 3, 5}, next()), bias = random_tensor({4}, next());
        r.grad("linear", {x, b, bias},
               [&] { return random_projection(ops::linear(x, b, {bias}), 16); }, opts(tol, s));
    }
    {
        const Td x = random_tensor({2, 3, 7, 6}, next()), k = random_tensor({4, 3, 3, 3}, next()),
                 bias = random_tensor({4}, next());
        r.grad("conv2d_s1_p1", {x, k, bias},
               [&] { return random_projection(ops::conv2d(x, k, {bias}, 1, 1), 17); },
               opts(tol, s));
        r.grad("conv2d_s2_p0", {x, k},
               [&] { return random_projection(ops::conv2d(x, k, std::optional<Td>{}, 2, 0), 18); },
               opts(tol, s));
        r.check("conv2d_vs_naive", 1e-12, [&] {
            double worst = 0.0;
            for (auto [stride, pad] : {std::pair{1, 0}, std::pair{1, 1}, std::pair{2, 1},
                                       std::pair{2, 2}}) {
                const auto y = ops::conv2d(x, k, {bias}, stride, pad);
                const auto ref = naive_conv2d(x.data(), 2, 3, 7, 6, k.data(), 4, 3, bias.data(),
                                              stride, pad);
                worst = std::max(worst, max_abs_diff(y.data(), ref));
            }
            return worst;
        });
    }
    {
        const Td x = random_tensor({3, 2, 4, 4}, next()), g = random_tensor({2}, next()),
                 b = random_tensor({2}, next());
        Td rm = Td::full({2}, 0.0), rv = Td::full({2}, 1.0);
        r.grad("batch_norm2d_train", {x, g, b},
               [&] {
                   return random_projection(
                       ops::batch_norm2d(x, g, b, rm, rv, {true, 0.1, 1e-5}), 19);
               },
               opts(tol, s));
        r.grad("batch_norm2d_eval", {x, g, b},
               [&] {
                   return random_projection(
                       ops::batch_norm2d(x, g, b, rm, rv, {false, 0.1, 1e-5}), 20);
               },
               opts(tol, s));
    }
    {
        const Td x = random_tensor({2, 3, 6}, next()), g = random_tensor({6}, next()),
                 b = random_tensor({6}, next());
        r.grad("layer_norm", {x, g, b},
               [&] { return random_projection(ops::layer_norm(x, g, b, 1e-5), 21); },
               opts(tol, s));
        r.grad("gelu", {x}, [&] { return random_projection(ops::gelu(x), 22); }, opts(tol, s));
        r.grad("sigmoid", {x}, [&] { return random_projection(ops::sigmoid(x), 23); },
               opts(tol, s));
        r.grad("tanh", {x}, [&] { return random_projection(ops::tanh(x), 24); }, opts(tol, s));
        const std::uint64_t mask_seed = next();
        r.grad("dropout_train", {x},
               [&] {
                   Rng rng(mask_seed);
                   return random_projection(ops::dropout(x, 0.3, true, rng), 25);
               },
               opts(tol, s));
        r.check("dropout_eval_identity", 0.0, [&] {
            Rng rng(1);
            const auto a = ops::dropout(x, 0.5, false, rng);
            const auto b0 = ops::dropout(x, 0.0, true, rng);
            const bool same = std::equal(a.data().begin(), a.data().end(), x.data().begin()) &&
                              std::equal(b0.data().begin(), b0.data().end(), x.data().begin());
            return same ? 0.0 : 1.0;
        });
        r.check("gelu_vs_erf_series", 1e-12, [&] {
            double worst = 0.0;
            const auto y = ops::gelu(x);
            for (std::size_t i = 0; i < x.numel(); ++i) {
                worst = std::max(worst, std::abs(y.data()[i] - gelu_reference(x.data()[i])));
            }
            return worst;
        });
        r.check("softmax_rows_sum_to_one", 1e-9, [&] {
            const auto y = ops::softmax(ops::scale(x, 30.0));
            double worst = 0.0;
            for (std::size_t row = 0; row < 6; ++row) {
                double acc = 0.0;
                for (std::size_t j = 0; j < 6; ++j) {
                    acc += y.data()[row * 6 + j];
                }
                worst = std::max(worst, std::abs(acc - 1.0));
            }
            return worst;
        });
    }
    {
        const Td x = random_tensor({2, 3, 7, 5}, next());
        r.grad("adaptive_avg_pool2d", {x},
               [&] { return random_projection(ops::adaptive_avg_pool2d(x, 3, 2), 26); },
               opts(tol, s));
        const Td logits = random_tensor({4, 3}, next());
        const std::vector<int> labels{0, 2, 1, 2};
        r.grad("softmax_cross_entropy", {logits},
               [&] { return ops::softmax_cross_entropy(logits, std::span<const int>(labels)); },
               opts(tol, s));
    }
    {
        const Td q = random_tensor({2, 5, 6}, next()), k = random_tensor({2, 5, 6}, next()),
                 v = random_tensor({2, 5, 6}, next());
        r.grad("attention", {q, k, v},
               [&] { return random_projection(ops::attention(q, k, v, 3), 27); }, opts(tol, s));
        r.check("attention_vs_naive", 1e-10, [&] {
            return max_abs_diff(ops::attention(q, k, v, 3).data(),
                                naive_attention(q.data(), k.data(), v.data(), 2, 5, 6, 3));
        });
    }
    {
        const Td x = random_tensor({2, 2, 6, 6}, next()), k = random_tensor({3, 2, 3, 3}, next()),
                 g = random_tensor({6}, next()), b = random_tensor({6}, next());
        r.grad("conv2d_gelu_layer_norm", {x, k, g, b},
               [&] {
                   const auto y = ops::gelu(ops::conv2d(x, k, std::optional<Td>{}, 1, 1));
                   return random_projection(ops::layer_norm(y, g, b, 1e-5), 28);
               },
               opts(tol, s));
    }
    return r.take();
}

std::vector<CheckResult> quantum_checks(std::uint64_t seed) {
    Recorder r("quantum");
    r.check("statevector_vs_dense_oracle_100", 1e-10, [&] {
        Rng rng(seed + 11);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto spec = random_spec(rng);
            const auto inputs = random_angles(rng, 4, 0.0, std::numbers::pi);
            const auto sv = quantum::run_circuit(spec, inputs);
            worst = std::max(worst, max_abs_diff(sv.amplitudes(), dense_circuit_state(spec, inputs)));
        }
        return worst;
    });
    r.check("parameter_shift_vs_fd_50", 1e-5, [&] {
        Rng rng(seed + 12);
        const double h = 1e-4;
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            auto spec = random_spec(rng);
            auto inputs = random_angles(rng, 4, 0.0, std::numbers::pi);
            const auto g = quantum::parameter_shift_grad(spec, inputs);
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                auto up = inputs, down = inputs;
                up[i] += h;
                down[i] -= h;
                const double fd = (quantum::circuit_expectation(spec, up) -
                                   quantum::circuit_expectation(spec, down)) /
                                  (2 * h);
                worst = std::max(worst, std::abs(fd - g.d_inputs[i]));
            }
            for (std::size_t i = 0; i < spec.theta.size(); ++i) {
                auto up = spec, down = spec;
                up.theta[i] += h;
                down.theta[i] -= h;
                const double fd = (quantum::circuit_expectation(up, inputs) -
                                   quantum::circuit_expectation(down, inputs)) /
                                  (2 * h);
                worst = std::max(worst, std::abs(fd - g.d_theta[i]));
            }
        }
        return worst;
    });
    r.check("single_qubit_shift_rule_analytic", 1e-12, [&] {
        Rng rng(seed + 13);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            quantum::CircuitSpec spec;
            spec.n_qubits = 1;
            spec.n_layers = 1;
            spec.theta = {-std::numbers::pi + 2 * std::numbers::pi * uniform01(rng)};
            const std::vector<double> input{0.0};
            const auto g = quantum::parameter_shift_grad(spec, input);
            worst = std::max({worst, std::abs(g.d_theta[0] + std::sin(spec.theta[0])),
                              std::abs(g.value - std::cos(spec.theta[0]))});
        }
        return worst;
    });
    r.check("unitarity_1000_gates", 1e-12, [&] {
        Rng rng(seed + 14);
        quantum::StateVector sv(4);
        double worst = 0.0;
        for (int g = 0; g < 1000; ++g) {
            const auto q = static_cast<std::size_t>(uniform_index(rng, 4));
            if (uniform01(rng) < 0.5) {
                quantum::apply_ry(sv, q, 2 * std::numbers::pi * uniform01(rng));
            } else {
                quantum::apply_cnot(sv, q, (q + 1 + uniform_index(rng, 3)) % 4);
            }
            worst = std::max(worst, std::abs(sv.norm_squared() - 1.0));
        }
        return worst;
    });
    r.check("expectation_matches_dense_diagonal", 1e-12, [&] {
        Rng rng(seed + 15);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const auto spec = random_spec(rng);
            const auto inputs = random_angles(rng, 4, 0.0, std::numbers::pi);
            worst = std::max(worst, std::abs(quantum::circuit_expectation(spec, inputs) -
                                             dense_expectation_z(dense_circuit_state(spec, inputs),
                                                                 4, 0)));
        }
        return worst;
    });
    r.check("gradient_bounded_by_one", 0.0, [&] {
        Rng rng(seed + 16);
        double excess = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const auto spec = random_spec(rng);
            const auto g =
                quantum::parameter_shift_grad(spec, random_angles(rng, 4, 0.0, std::numbers::pi));
            for (double d : g.d_inputs) {
                excess = std::max(excess, std::abs(d) - 1.0 - 1e-12);
            }
            for (double d : g.d_theta) {
                excess = std::max(excess, std::abs(d) - 1.0 - 1e-12);
            }
        }
        return std::max(0.0, excess);
    });
    return r.take();
}

std::vector<CheckResult> quanv_checks(std::uint64_t seed) {
    Recorder r("quanv");
    quanv::QuanvConfig config;
    ParamStore<double> store;
    Rng rng(seed + 21);
    quanv::QuanvBranch<double> branch(config, store, "quanv", rng);
    randomize(store, seed + 22, 0.05);
    const Td images = random_tensor({2, 3, 24, 24}, seed + 23, false);
    const RunContext eval{false, nullptr};

    r.grad("end_to_end_mixer_and_theta",
           {branch.mixer().weight, branch.mixer().bias, branch.theta()},
           [&] { return random_projection(branch.forward(images, eval), 31); },
           opts(1e-4, seed));
    r.grad("classical_stem_and_mixer", parameter_list(store),
           [&] { return random_projection(branch.mix(branch.stem(images, eval)), 32); },
           opts(1e-6, seed, 6));
    r.check("quantum_map_within_unit_interval", 0.0, [&] {
        NoGradGuard guard;
        const Td big = random_tensor({2, 3, 24, 24}, seed + 24, false, 50.0);
        const auto qmap = branch.quantum_map(branch.mix(branch.stem(big, eval)));
        double excess = 0.0;
        for (double v : qmap.data()) {
            excess = std::max(excess, std::abs(v) - 1.0);
        }
        return std::max(0.0, excess);
    });
    r.check("patch_extraction_bijection", 0.0, [&] {
        const Td map = random_tensor({2, 1, 8, 8}, seed + 25, false);
        const auto back = quanv::assemble_patches(quanv::extract_patches(map, 2), 8, 8);
        return max_abs_diff(back.data(), map.data());
    });
    r.check("batch_invariance_eval", 0.0, [&] {
        NoGradGuard guard;
        const auto batched = branch.forward(images, eval);
        double worst = 0.0;
        const std::size_t per = 3 * 24 * 24;
        for (std::size_t b = 0; b < 2; ++b) {
            const Td one({1, 3, 24, 24},
                         std::vector<double>(images.data().begin() + static_cast<std::ptrdiff_t>(b * per),
                                             images.data().begin() +
                                                 static_cast<std::ptrdiff_t>((b + 1) * per)));
            const auto single = branch.forward(one, eval);
            worst = std::max(worst,
                             max_abs_diff(single.data(), batched.data().subspan(b * 64, 64)));
        }
        return worst;
    });

    // Constant circuit: the branch degenerates to a classical pipeline.
    branch.set_evaluator([](const quantum::CircuitSpec &spec, std::span<const double> angles,
                            bool) {
        quantum::CircuitGradient g;
        g.value = 1.0;
        g.d_inputs.assign(angles.size(), 0.0);
        g.d_theta.assign(spec.theta.size(), 0.0);
        return g;
    });
    r.grad("constant_circuit_classical_pipeline", parameter_list(store),
           [&] { return random_projection(branch.forward(images, eval), 33); },
           opts(1e-6, seed, 6));
    branch.set_evaluator(quanv::statevector_evaluator());
    return r.take();
}

namespace {

vit::ViTConfig small_vit() {
    vit::ViTConfig c;
    c.image_size = 28;
    c.patch_size = 14;
    c.d_model = 16;
    c.n_layers = 1;
    c.n_heads = 2;
    c.d_mlp = 32;
    return c;
}

} // namespace

std::vector<CheckResult> vit_checks(std::uint64_t seed) {
    Recorder r("vit");
    ParamStore<double> store;
    Rng rng(seed + 41);
    vit::VisionTransformer<double> model(small_vit(), store, "vit", rng);
    randomize(store, seed + 42, 0.1);
    const RunContext eval{false, nullptr};
    const Td tokens = random_tensor({2, 5, 16}, seed + 43);

    std::vector<Td> block_inputs{tokens};
    for (const auto &entry : store.parameters()) {
        if (entry.name.starts_with("vit.blocks.0.")) {
            block_inputs.push_back(entry.tensor);
        }
    }
    r.grad("encoder_block", block_inputs,
           [&] { return random_projection(model.encoder_block(0, tokens, eval), 41); },
           opts(1e-5, seed));
    const Td images = random_tensor({2, 3, 28, 28}, seed + 44, false);
    r.grad("vit_forward", parameter_list(store),
           [&] { return random_projection(model.forward(images, eval), 42); },
           opts(1e-5, seed, 8));
    r.check("context_within_open_interval", 0.0, [&] {
        NoGradGuard guard;
        const auto y = model.forward(random_tensor({2, 3, 28, 28}, seed + 45, false, 10.0), eval);
        double excess = 0.0;
        for (double v : y.data()) {
            excess = std::max(excess, std::abs(v) >= 1.0 ? 1.0 : 0.0);
        }
        return excess;
    });
    r.check("token_permutation_equivariance", 1e-12, [&] {
        NoGradGuard guard;
        const Td x = tokens.detach();
        std::vector<double> swapped(x.data().begin(), x.data().end());
        for (std::size_t b = 0; b < 2; ++b) {
            for (std::size_t d = 0; d < 16; ++d) {
                std::swap(swapped[(b * 5 + 1) * 16 + d], swapped[(b * 5 + 3) * 16 + d]);
            }
        }
        const auto y = model.encoder_block(0, x, eval);
        const auto ys = model.encoder_block(0, Td({2, 5, 16}, swapped), eval);
        double worst = 0.0;
        for (std::size_t b = 0; b < 2; ++b) {
            for (std::size_t t = 0; t < 5; ++t) {
                const std::size_t src = t == 1 ? 3 : (t == 3 ? 1 : t);
                for (std::size_t d = 0; d < 16; ++d) {
                    worst = std::max(worst, std::abs(ys.data()[(b * 5 + t) * 16 + d] -
                                                     y.data()[(b * 5 + src) * 16 + d]));
                }
            }
        }
        return worst;
    });
    return r.take();
}

std::vector<CheckResult> model_checks(std::uint64_t seed) {
    Recorder r("model");
    const RunContext eval{false, nullptr};
    {
        model::HybridModel<double> net(model::ModelConfig::toy(), seed + 51);
        randomize(net.params(), seed + 52, 0.05);
        const Td fused = random_tensor({3, net.config().fused_width()}, seed + 53);
        std::vector<Td> inputs{fused};
        for (const auto &entry : net.params().parameters()) {
            if (entry.name.starts_with("classifier.")) {
                inputs.push_back(entry.tensor);
            }
        }
        r.grad("classifier", inputs,
               [&] { return random_projection(net.classify(fused, eval), 51); },
               opts(1e-6, seed, 16));
        const Td images = random_tensor({2, 3, 56, 56}, seed + 54, false);
        const std::vector<int> labels{0, 1};
        r.grad("toy_hybrid_end_to_end", parameter_list(net.params()),
               [&] {
                   return ops::softmax_cross_entropy(net.forward(images, eval),
                                                     std::span<const int>(labels));
               },
               opts(1e-5, seed, 2));
    }
    {
        auto config = model::ModelConfig::toy();
        config.mode = model::Mode::Baseline;
        model::HybridModel<double> net(config, seed + 55);
        randomize(net.params(), seed + 56, 0.05);
        const Td images = random_tensor({2, 3, 56, 56}, seed + 57, false);
        r.grad("toy_baseline_end_to_end", parameter_list(net.params()),
               [&] { return random_projection(net.forward(images, eval), 52); },
               opts(1e-5, seed, 2));
    }
    return r.take();
}

std::vector<CheckResult> run_suite(Scope scope, std::uint64_t seed) {
    std::vector<CheckResult> out;
    auto append = [&out](std::vector<CheckResult> part) {
        out.insert(out.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    };
    if (scope == Scope::Numerics || scope == Scope::All) {
        append(numerics_checks(seed));
    }
    if (scope == Scope::Quantum || scope == Scope::All) {
        append(quantum_checks(seed));
    }
    if (scope == Scope::Quanv || scope == Scope::All) {
        append(quanv_checks(seed));
    }
    if (scope == Scope::Vit || scope == Scope::All) {
        append(vit_checks(seed));
    }
    if (scope == Scope::Model || scope == Scope::All) {
        append(model_checks(seed));
    }
    return out;
}

} // namespace qviton::verify
