// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Optimization loop, learning-rate schedule and classification metrics.
 *
 * The positive class of the confusion matrix is Flooded (label 1).
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qviton/data.hpp"
#include "qviton/model.hpp"
#include "qviton/param_store.hpp"

namespace qviton::train {

enum class ScheduleGranularity { Epoch, Step };
std::string to_string(ScheduleGranularity granularity);
ScheduleGranularity schedule_from_string(const std::string &name);

struct TrainConfig {
    double lr_max = 1e-4;
    double weight_decay = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t warmup_epochs = 5;
    std::size_t total_epochs = 50;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
    bool clip_gradients = true;
    double clip_norm = 1.0;
    bool augment = true;
    ScheduleGranularity schedule = ScheduleGranularity::Epoch;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Linear warmup over `warmup` epochs then half-cosine decay to zero at
/// `total`. `epoch` may be fractional (per-step schedules). ContractError
/// when epoch is outside [0, total).
double lr_schedule(double epoch, std::size_t warmup, std::size_t total, double lr_max);
double lr_schedule(std::size_t epoch, const TrainConfig &config);
/// Learning rate for optimizer step `step` of `steps_per_epoch` in `epoch`.
double lr_at(const TrainConfig &config, std::size_t epoch, std::size_t step,
             std::size_t steps_per_epoch);

/// AdamW with weight decay decoupled from the adaptive update:
///   p <- p - lr * wd * p
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
template <typename T> class AdamW {
  public:
    AdamW(const ParamStore<T> &store, double beta1, double beta2, double eps,
          double weight_decay);
    AdamW(const ParamStore<T> &store, const TrainConfig &config);

    /// One update of every parameter. NumericalError naming the parameter
    /// when its gradient is not finite.
    void step(ParamStore<T> &store, double lr);

    [[nodiscard]] std::uint64_t steps() const { return steps_; }
    void set_steps(std::uint64_t steps) { steps_ = steps; }
    [[nodiscard]] std::vector<std::vector<T>> &first_moments() { return m_; }
    [[nodiscard]] std::vector<std::vector<T>> &second_moments() { return v_; }
    [[nodiscard]] const std::vector<std::vector<T>> &first_moments() const { return m_; }
    [[nodiscard]] const std::vector<std::vector<T>> &second_moments() const { return v_; }

  private:
    double beta1_, beta2_, eps_, weight_decay_;
    std::uint64_t steps_ = 0;
    std::vector<std::vector<T>> m_, v_;
};

/// L2 norm over every parameter gradient.
template <typename T> double global_grad_norm(const ParamStore<T> &store);

/// Rescales gradients so their global norm is at most `max_norm`; returns
/// the norm before clipping.
template <typename T> double clip_grad_norm(ParamStore<T> &store, double max_norm);

struct ConfusionMatrix {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

    void add(int truth, int predicted);
    [[nodiscard]] std::size_t total() const { return tp + tn + fp + fn; }
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    bool degenerate = false; // some denominator was zero; value set to 0
};

struct Metrics {
    double accuracy = 0.0;
    ClassMetrics flooded;
    ClassMetrics non_flooded;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    [[nodiscard]] bool degenerate() const { return flooded.degenerate || non_flooded.degenerate; }
};

/// 2PR / (P + R), or 0 when P + R == 0.
double f1_score(double precision, double recall);

/// Accuracy, per-class precision/recall/F1 and aggregates. ContractError
/// on an all-zero matrix.
Metrics compute_metrics(const ConfusionMatrix &cm);

/// Preprocessed images with labels, held in memory.
struct LabeledImages {
    std::vector<data::Image> images;
    std::vector<int> labels;

    [[nodiscard]] std::size_t size() const { return images.size(); }
};

/// Stacks the selected images into [B, C, S, S].
template <typename T>
Tensor<T> make_batch(const std::vector<data::Image> &images, std::span<const std::size_t> indices);

struct EpochLog {
    double mean_loss = 0.0;
    double lr = 0.0;
    double grad_norm = 0.0; // mean pre-clip norm over the epoch's steps
    std::size_t steps = 0;
};

/// One pass of `train.size()` sampler draws in batches: augment, forward,
/// cross-entropy, backward, clip, AdamW. NumericalError on a non-finite
/// loss, naming the batch.
template <typename T>
EpochLog train_epoch(model::HybridModel<T> &model, AdamW<T> &optimizer,
                     const LabeledImages &train, data::WeightedSampler &sampler, Rng &rng,
                     const TrainConfig &config, std::size_t epoch);

/// Eval-mode predictions (argmax of the logits).
template <typename T>
std::vector<int> predict(model::HybridModel<T> &model, const std::vector<data::Image> &images,
                         std::size_t batch_size);

/// Eval-mode confusion matrix over `split`; ContractError when it is empty.
template <typename T>
ConfusionMatrix evaluate(model::HybridModel<T> &model, const LabeledImages &split,
                         std::size_t batch_size);

} // namespace qviton::train
