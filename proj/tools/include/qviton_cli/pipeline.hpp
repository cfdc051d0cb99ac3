// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "qviton/train.hpp"
#include "qviton_cli/run_config.hpp"

namespace qviton::cli {

/// Scan, quality filter and split of the configured dataset.
data::DatasetManifest prepare_manifest(const RunConfig &config, std::ostream &log);

/// Loads and preprocesses one split of `manifest`.
train::LabeledImages load_split(const data::DatasetManifest &manifest, data::Split split,
                                const RunConfig &config, std::size_t workers);

/// Header of the per-epoch metrics log.
inline constexpr const char *kMetricsHeader =
    "epoch,lr,train_loss,val_acc,val_f1_flood,val_f1_nonflood";

struct TrainOptions {
    std::optional<std::filesystem::path> resume;
    std::size_t stop_after = 0; // stop once this many epochs are complete (0 = run to the end)
    std::size_t workers = 1;
};

struct TrainSummary {
    std::size_t first_epoch = 0;
    std::size_t epochs_completed = 0;
    train::Metrics final_val;
    double best_score = -1.0;
    std::uint64_t circuit_evaluations = 0;
};

/// Full training run into config.output.dir: metrics.csv, ckpt_last.qvck,
/// ckpt_best.qvck (best validation macro F1) and periodic snapshots.
TrainSummary run_training(const RunConfig &config, const TrainOptions &options,
                          std::ostream &log);

struct EvalReport {
    std::string split;
    train::ConfusionMatrix confusion;
    train::Metrics metrics;
};

/// Evaluates a checkpoint on one split. `data_root` overrides the stored
/// dataset location; `expected` (when set) must describe the same model.
EvalReport run_eval(const std::filesystem::path &checkpoint, data::Split split,
                    const std::optional<std::string> &data_root,
                    const std::optional<RunConfig> &expected, std::size_t workers);

/// Table layout: one row per class (Flooded, Non-Flooded), then accuracy
/// and the confusion matrix.
void print_report(const EvalReport &report, std::ostream &out);

/// Confusion matrix as CSV (rows = truth, columns = prediction).
void write_confusion_csv(const train::ConfusionMatrix &cm, const std::filesystem::path &path);

struct Prediction {
    int label = 0;
    double p_flooded = 0.0;
    double p_non_flooded = 0.0;
};

Prediction run_predict(const std::filesystem::path &checkpoint, const std::filesystem::path &tile);

} // namespace qviton::cli
