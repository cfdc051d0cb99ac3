// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Binary checkpoint, all integers little-endian:
 *
 *   "QVCK" u32 version
 *   u64 len, config JSON
 *   u64 epoch (completed epochs), f64 best_score, u64 best_epoch
 *   u64 n; n x tensor                      parameters
 *   u64 n; n x tensor                      buffers
 *   u64 optimizer steps; u64 n; n x (f32[] m, f32[] v)
 *   u64 len, train RNG state; u64 len, sampler RNG state
 *
 *   tensor = u64 len, name; u64 rank; rank x u64 extent; f32 values
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qviton/model.hpp"
#include "qviton/train.hpp"

namespace qviton::cli {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
    std::string name;
    Shape shape;
    std::vector<float> values;
};

struct Checkpoint {
    std::string config_json;
    std::uint64_t epoch = 0;
    double best_score = -1.0;
    std::uint64_t best_epoch = 0;
    std::vector<NamedArray> parameters;
    std::vector<NamedArray> buffers;
    std::uint64_t optimizer_steps = 0;
    std::vector<std::vector<float>> first_moments;
    std::vector<std::vector<float>> second_moments;
    std::string train_rng;
    std::string sampler_rng;

    [[nodiscard]] std::vector<char> serialize() const;
    static Checkpoint deserialize(const std::vector<char> &bytes);

    void save(const std::filesystem::path &path) const;
    static Checkpoint load(const std::filesystem::path &path);
};

/// Snapshot of a model and (optionally) its optimizer.
Checkpoint capture(const model::HybridModel<float> &model, const train::AdamW<float> *optimizer);

/// Copies stored tensors into `model`; ConfigError when names or shapes
/// disagree with the model's parameter set.
void restore_model(const Checkpoint &checkpoint, model::HybridModel<float> &model);
void restore_optimizer(const Checkpoint &checkpoint, train::AdamW<float> &optimizer);

} // namespace qviton::cli
