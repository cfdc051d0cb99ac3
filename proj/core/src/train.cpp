// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qviton/error.hpp"

namespace qviton::train {

std::string to_string(ScheduleGranularity granularity) {
    return granularity == ScheduleGranularity::Epoch ? "epoch" : "step";
}

ScheduleGranularity schedule_from_string(const std::string &name) {
    if (name == "epoch") {
        return ScheduleGranularity::Epoch;
    }
    if (name == "step") {
        return ScheduleGranularity::Step;
    }
    throw ConfigError("unknown schedule granularity '" + name + "' (expected epoch or step)");
}

void TrainConfig::validate() const {
    if (!(lr_max > 0.0) || !std::isfinite(lr_max)) {
        throw ConfigError("lr_max must be positive");
    }
    if (!(weight_decay >= 0.0)) {
        throw ConfigError("weight_decay must be non-negative");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0)) {
        throw ConfigError("beta1 must lie in [0, 1)");
    }
    if (!(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("beta2 must lie in [0, 1)");
    }
    if (!(eps > 0.0)) {
        throw ConfigError("eps must be positive");
    }
    if (warmup_epochs == 0 || warmup_epochs >= total_epochs) {
        throw ConfigError("warmup_epochs must satisfy 0 < warmup_epochs < total_epochs");
    }
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    if (clip_gradients && !(clip_norm > 0.0)) {
        throw ConfigError("clip_norm must be positive");
    }
}

double lr_schedule(double epoch, std::size_t warmup, std::size_t total, double lr_max) {
    if (!(epoch >= 0.0) || epoch >= static_cast<double>(total)) {
        throw ContractError("lr_schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(total) + ")");
    }
    const auto W = static_cast<double>(warmup);
    const auto T = static_cast<double>(total);
    if (epoch < W) {
        return lr_max * (epoch + 1.0) / W;
    }
    return lr_max * 0.5 * (1.0 + std::cos(std::numbers::pi * (epoch - W) / (T - W)));
}

double lr_schedule(std::size_t epoch, const TrainConfig &config) {
    return lr_schedule(static_cast<double>(epoch), config.warmup_epochs, config.total_epochs,
                       config.lr_max);
}

double lr_at(const TrainConfig &config, std::size_t epoch, std::size_t step,
             std::size_t steps_per_epoch) {
    if (config.schedule == ScheduleGranularity::Epoch || steps_per_epoch == 0) {
        return lr_schedule(epoch, config);
    }
    const double e = static_cast<double>(epoch) +
                     static_cast<double>(step) / static_cast<double>(steps_per_epoch);
    return lr_schedule(e, config.warmup_epochs, config.total_epochs, config.lr_max);
}

template <typename T>
AdamW<T>::AdamW(const ParamStore<T> &store, double beta1, double beta2, double eps,
                double weight_decay)
    : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {
    for (const auto &entry : store.parameters()) {
        m_.emplace_back(entry.tensor.numel(), T{0});
        v_.emplace_back(entry.tensor.numel(), T{0});
    }
}

template <typename T>
AdamW<T>::AdamW(const ParamStore<T> &store, const TrainConfig &config)
    : AdamW(store, config.beta1, config.beta2, config.eps, config.weight_decay) {}

template <typename T> void AdamW<T>::step(ParamStore<T> &store, double lr) {
    const auto &params = store.parameters();
    if (params.size() != m_.size()) {
        throw ContractError("AdamW: parameter set changed since construction");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto grad = params[i].tensor.grad();
        if (grad.empty()) {
            continue;
        }
        for (T g : grad) {
            if (!std::isfinite(static_cast<double>(g))) {
                throw NumericalError("non-finite gradient in parameter '" + params[i].name + "'");
            }
        }
    }
    ++steps_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor<T> p = params[i].tensor;
        const auto grad = p.grad();
        auto data = p.data();
        auto &m = m_[i];
        auto &v = v_[i];
        for (std::size_t j = 0; j < data.size(); ++j) {
            const double g = grad.empty() ? 0.0 : static_cast<double>(grad[j]);
            double w = static_cast<double>(data[j]);
            w -= lr * weight_decay_ * w;
            const double mj = beta1_ * static_cast<double>(m[j]) + (1.0 - beta1_) * g;
            const double vj = beta2_ * static_cast<double>(v[j]) + (1.0 - beta2_) * g * g;
            m[j] = static_cast<T>(mj);
            v[j] = static_cast<T>(vj);
            w -= lr * (mj / bc1) / (std::sqrt(vj / bc2) + eps_);
            data[j] = static_cast<T>(w);
        }
    }
}

template <typename T> double global_grad_norm(const ParamStore<T> &store) {
    double sq = 0.0;
    for (const auto &entry : store.parameters()) {
        for (T g : entry.tensor.grad()) {
            sq += static_cast<double>(g) * static_cast<double>(g);
        }
    }
    return std::sqrt(sq);
}

template <typename T> double clip_grad_norm(ParamStore<T> &store, double max_norm) {
    const double norm = global_grad_norm(store);
    if (norm > max_norm && std::isfinite(norm)) {
        const double factor = max_norm / norm;
        for (const auto &entry : store.parameters()) {
            Tensor<T> p = entry.tensor;
            if (p.grad().empty()) {
                continue;
            }
            for (T &g : p.mutable_grad()) {
                g = static_cast<T>(static_cast<double>(g) * factor);
            }
        }
    }
    return norm;
}

void ConfusionMatrix::add(int truth, int predicted) {
    if ((truth != 0 && truth != 1) || (predicted != 0 && predicted != 1)) {
        throw IndexError("confusion matrix: labels must be 0 or 1");
    }
    if (truth == data::kFlooded) {
        ++(predicted == data::kFlooded ? tp : fn);
    } else {
        ++(predicted == data::kFlooded ? fp : tn);
    }
}

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

namespace {

ClassMetrics class_metrics(std::size_t hit, std::size_t false_alarm, std::size_t miss) {
    ClassMetrics c;
    c.support = hit + miss;
    const std::size_t predicted = hit + false_alarm;
    if (predicted > 0) {
        c.precision = static_cast<double>(hit) / static_cast<double>(predicted);
    } else {
        c.degenerate = true;
    }
    if (c.support > 0) {
        c.recall = static_cast<double>(hit) / static_cast<double>(c.support);
    } else {
        c.degenerate = true;
    }
    if (c.precision + c.recall > 0.0) {
        c.f1 = f1_score(c.precision, c.recall);
    } else {
        c.degenerate = true;
    }
    return c;
}

} // namespace

Metrics compute_metrics(const ConfusionMatrix &cm) {
    const std::size_t n = cm.total();
    if (n == 0) {
        throw ContractError("metrics of an all-zero confusion matrix");
    }
    Metrics m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(n);
    m.flooded = class_metrics(cm.tp, cm.fp, cm.fn);
    m.non_flooded = class_metrics(cm.tn, cm.fn, cm.fp);
    m.macro_f1 = 0.5 * (m.flooded.f1 + m.non_flooded.f1);
    m.weighted_f1 = (m.flooded.f1 * static_cast<double>(m.flooded.support) +
                     m.non_flooded.f1 * static_cast<double>(m.non_flooded.support)) /
                    static_cast<double>(n);
    return m;
}

template <typename T>
Tensor<T> make_batch(const std::vector<data::Image> &images,
                     std::span<const std::size_t> indices) {
    if (indices.empty()) {
        throw ContractError("make_batch: empty batch");
    }
    const data::Image &first = images.at(indices[0]);
    const std::size_t per = first.pixels.size();
    std::vector<T> values;
    values.reserve(per * indices.size());
    for (std::size_t idx : indices) {
        const data::Image &img = images.at(idx);
        if (img.pixels.size() != per || img.size != first.size) {
            throw DimensionError("make_batch: images differ in size");
        }
        for (float v : img.pixels) {
            values.push_back(static_cast<T>(v));
        }
    }
    return Tensor<T>({indices.size(), first.channels, first.size, first.size}, std::move(values));
}

namespace {

template <typename T> int argmax_row(std::span<const T> logits, std::size_t row, std::size_t c) {
    const auto begin = logits.begin() + static_cast<std::ptrdiff_t>(row * c);
    return static_cast<int>(std::max_element(begin, begin + static_cast<std::ptrdiff_t>(c)) - begin);
}

} // namespace

template <typename T>
EpochLog train_epoch(model::HybridModel<T> &model, AdamW<T> &optimizer,
                     const LabeledImages &train, data::WeightedSampler &sampler, Rng &rng,
                     const TrainConfig &config, std::size_t epoch) {
    const std::size_t n = train.size();
    if (n == 0) {
        throw ContractError("train_epoch: empty training set");
    }
    const std::size_t steps = (n + config.batch_size - 1) / config.batch_size;
    RunContext ctx{true, &rng};
    EpochLog log;
    double loss_sum = 0.0, norm_sum = 0.0;
    std::size_t drawn = 0;
    for (std::size_t step = 0; step < steps; ++step) {
        const std::size_t b = std::min(config.batch_size, n - drawn);
        std::vector<data::Image> batch_images;
        std::vector<int> labels;
        batch_images.reserve(b);
        for (std::size_t i = 0; i < b; ++i) {
            const std::size_t idx = sampler.next();
            batch_images.push_back(config.augment ? data::augment(train.images[idx], rng)
                                                  : train.images[idx]);
            labels.push_back(train.labels[idx]);
        }
        drawn += b;
        std::vector<std::size_t> order(b);
        for (std::size_t i = 0; i < b; ++i) {
            order[i] = i;
        }
        const Tensor<T> x = make_batch<T>(batch_images, order);
        const Tensor<T> loss = ops::softmax_cross_entropy(model.forward(x, ctx), labels);
        const double value = static_cast<double>(loss.item());
        if (!std::isfinite(value)) {
            throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                 std::to_string(step));
        }
        model.params().zero_grad();
        loss.backward();
        const double norm = config.clip_gradients ? clip_grad_norm(model.params(), config.clip_norm)
                                                  : global_grad_norm(model.params());
        const double lr = lr_at(config, epoch, step, steps);
        optimizer.step(model.params(), lr);
        loss_sum += value;
        norm_sum += norm;
        log.lr = step == 0 ? lr : log.lr;
    }
    log.steps = steps;
    log.mean_loss = loss_sum / static_cast<double>(steps);
    log.grad_norm = norm_sum / static_cast<double>(steps);
    return log;
}

template <typename T>
std::vector<int> predict(model::HybridModel<T> &model, const std::vector<data::Image> &images,
                         std::size_t batch_size) {
    NoGradGuard guard;
    const RunContext ctx{false, nullptr};
    std::vector<int> out;
    out.reserve(images.size());
    const std::size_t classes = model.config().n_classes;
    for (std::size_t start = 0; start < images.size(); start += batch_size) {
        const std::size_t b = std::min(batch_size, images.size() - start);
        std::vector<std::size_t> idx(b);
        for (std::size_t i = 0; i < b; ++i) {
            idx[i] = start + i;
        }
        const Tensor<T> logits = model.forward(make_batch<T>(images, idx), ctx);
        for (std::size_t i = 0; i < b; ++i) {
            out.push_back(argmax_row<T>(logits.data(), i, classes));
        }
    }
    return out;
}

template <typename T>
ConfusionMatrix evaluate(model::HybridModel<T> &model, const LabeledImages &split,
                         std::size_t batch_size) {
    if (split.size() == 0) {
        throw ContractError("evaluate: empty split");
    }
    const auto predictions = predict(model, split.images, batch_size);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        cm.add(split.labels[i], predictions[i]);
    }
    return cm;
}

#define QVITON_INSTANTIATE_TRAIN(T)                                                                \
    template class AdamW<T>;                                                                       \
    template double global_grad_norm(const ParamStore<T> &);                                       \
    template double clip_grad_norm(ParamStore<T> &, double);                                       \
    template Tensor<T> make_batch(const std::vector<data::Image> &,                                \
                                  std::span<const std::size_t>);                                   \
    template EpochLog train_epoch(model::HybridModel<T> &, AdamW<T> &, const LabeledImages &,      \
                                  data::WeightedSampler &, Rng &, const TrainConfig &,             \
                                  std::size_t);                                                    \
    template std::vector<int> predict(model::HybridModel<T> &, const std::vector<data::Image> &,  \
                                      std::size_t);                                                \
    template ConfusionMatrix evaluate(model::HybridModel<T> &, const LabeledImages &, std::size_t);

QVITON_INSTANTIATE_TRAIN(float)
QVITON_INSTANTIATE_TRAIN(double)

} // namespace qviton::train
