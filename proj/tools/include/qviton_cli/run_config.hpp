// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Run configuration: a JSON document layered over an embedded preset.
 *
 *   {
 *     "preset": "toy" | "paper",
 *     "mode": "hybrid" | "baseline",
 *     "seed": 0,
 *     "workers": 0,
 *     "data":   { "root", "band", "image_size", "split_ratios", "granularity",
 *                 "median_filter", "percentile_stretch" },
 *     "model":  { "patch_size", "d_model", "n_layers", "n_heads", "d_mlp",
 *                 "hidden", "dropout", "circuit_layers", "observable_qubit" },
 *     "train":  { "lr_max", "weight_decay", "beta1", "beta2", "eps",
 *                 "warmup_epochs", "total_epochs", "batch_size", "clip_gradients",
 *                 "clip_norm", "augment", "schedule" },
 *     "output": { "dir", "checkpoint_every" }
 *   }
 *
 * Unknown keys are rejected with a ConfigError naming the dotted path.
 */

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "qviton/data.hpp"
#include "qviton/model.hpp"
#include "qviton/train.hpp"

namespace qviton::cli {

struct DataConfig {
    std::string root;
    std::size_t band = 0;
    std::array<double, 3> split_ratios{0.70, 0.15, 0.15};
    data::SplitGranularity granularity = data::SplitGranularity::Region;
    data::PreprocessOptions preprocess;
};

struct OutputConfig {
    std::string dir = "runs/latest";
    std::size_t checkpoint_every = 10; // 0 disables periodic snapshots
};

struct RunConfig {
    std::string preset = "toy";
    std::uint64_t seed = 0;
    std::size_t workers = 0; // 0 = hardware concurrency
    DataConfig data;
    model::ModelConfig model;
    train::TrainConfig train;
    OutputConfig output;

    /// Full preset ("toy" or "paper"); ConfigError for other names.
    static RunConfig preset_config(const std::string &name);
    /// Preset named by the document's "preset" key (default toy) with the
    /// document's fields applied on top.
    static RunConfig from_json(const std::string &text);
    static RunConfig from_file(const std::filesystem::path &path);

    /// Canonical JSON with every field populated (stable key order).
    [[nodiscard]] std::string to_json() const;
    /// Canonical JSON of the architecture fields only, used to match
    /// checkpoints against configurations.
    [[nodiscard]] std::string model_json() const;

    /// Field-level validation; `check_paths` also requires data.root to exist.
    void validate(bool check_paths) const;
};

/// Applies QVITON_SEED when set; ConfigError when it is not an integer.
void apply_seed_override(RunConfig &config);

/// Derived seeds for independent streams.
struct SeedPlan {
    std::uint64_t init, split, sampler, train;
};
SeedPlan seed_plan(std::uint64_t seed);

} // namespace qviton::cli
