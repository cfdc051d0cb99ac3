// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton_cli/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "qviton/error.hpp"
#include "qviton/quantum.hpp"
#include "qviton_cli/checkpoint.hpp"

namespace qviton::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed6(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << v;
    return s.str();
}

std::string snapshot_name(std::size_t epoch) {
    std::ostringstream s;
    s << "ckpt_epoch_" << std::setw(3) << std::setfill('0') << epoch << ".qvck";
    return s.str();
}

// Keeps the header and the rows of epochs before `first_epoch`.
void prepare_metrics_file(const fs::path &path, std::size_t first_epoch) {
    std::vector<std::string> kept;
    if (first_epoch > 0 && fs::exists(path)) {
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
                continue;
            }
            if (std::stoull(line.substr(0, comma)) < first_epoch) {
                kept.push_back(line);
            }
        }
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write metrics log '" + path.string() + "'");
    }
    out << kMetricsHeader << '\n';
    for (const auto &line : kept) {
        out << line << '\n';
    }
}

Checkpoint snapshot(const RunConfig &config, const model::HybridModel<float> &model,
                    const train::AdamW<float> &optimizer, std::size_t epochs_done,
                    double best_score, std::size_t best_epoch, const Rng &rng,
                    const data::WeightedSampler &sampler) {
    Checkpoint c = capture(model, &optimizer);
    c.config_json = config.to_json();
    c.epoch = epochs_done;
    c.best_score = best_score;
    c.best_epoch = best_epoch;
    c.train_rng = rng_state(rng);
    c.sampler_rng = sampler.state();
    return c;
}

} // namespace

data::DatasetManifest prepare_manifest(const RunConfig &config, std::ostream &log) {
    data::DatasetManifest manifest = data::scan_dataset(config.data.root);
    if (manifest.regions_missing_metadata > 0) {
        log << "warning: " << manifest.regions_missing_metadata
            << " region(s) missing from metadata.json, labeled non-flooded\n";
    }
    data::curate(manifest, config.data.band);
    for (const auto &[reason, count] : manifest.discarded) {
        log << "discarded " << count << " tile(s): " << reason << '\n';
    }
    if (manifest.samples.empty()) {
        throw IoError("no tiles survived quality filtering under '" + config.data.root + "'");
    }
    data::split_dataset(manifest, config.data.split_ratios, seed_plan(config.seed).split,
                        config.data.granularity);
    return manifest;
}

train::LabeledImages load_split(const data::DatasetManifest &manifest, data::Split split,
                                const RunConfig &config, std::size_t workers) {
    const auto samples = manifest.in_split(split);
    train::LabeledImages out;
    out.images = data::load_images(samples, config.data.band, config.data.preprocess, workers);
    for (const auto &s : samples) {
        out.labels.push_back(s.label);
    }
    return out;
}

TrainSummary run_training(const RunConfig &config, const TrainOptions &options,
                          std::ostream &log) {
    config.validate(true);
    const fs::path out_dir = config.output.dir;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) {
        throw ConfigError("output.dir: cannot create '" + out_dir.string() + "'");
    }

    const auto manifest = prepare_manifest(config, log);
    data::write_manifest_jsonl(manifest, out_dir / "manifest.jsonl");
    const auto train_set = load_split(manifest, data::Split::Train, config, options.workers);
    const auto val_set = load_split(manifest, data::Split::Val, config, options.workers);
    if (train_set.size() == 0 || val_set.size() == 0) {
        throw ConfigError("data.split_ratios: train and validation splits must be non-empty (got " +
                          std::to_string(train_set.size()) + " and " +
                          std::to_string(val_set.size()) + " tiles)");
    }
    log << "tiles: train " << train_set.size() << ", val " << val_set.size() << ", test "
        << manifest.in_split(data::Split::Test).size() << '\n';

    const SeedPlan seeds = seed_plan(config.seed);
    model::HybridModel<float> net(config.model, seeds.init);
    train::AdamW<float> optimizer(net.params(), config.train);
    data::WeightedSampler sampler(train_set.labels, seeds.sampler);
    Rng rng(seeds.train);
    log << "model: " << model::to_string(config.model.mode) << ", "
        << net.params().parameter_count() << " trainable parameters\n";

    TrainSummary summary;
    std::size_t best_epoch = 0;
    if (options.resume) {
        const Checkpoint ckpt = Checkpoint::load(*options.resume);
        const RunConfig stored = RunConfig::from_json(ckpt.config_json);
        if (stored.model_json() != config.model_json()) {
            throw ConfigError("model: checkpoint '" + options.resume->string() +
                              "' was written for a different model configuration");
        }
        restore_model(ckpt, net);
        restore_optimizer(ckpt, optimizer);
        set_rng_state(rng, ckpt.train_rng);
        sampler.set_state(ckpt.sampler_rng);
        summary.first_epoch = ckpt.epoch;
        summary.best_score = ckpt.best_score;
        best_epoch = ckpt.best_epoch;
        log << "resumed from epoch " << ckpt.epoch << '\n';
    }
    const fs::path metrics_path = out_dir / "metrics.csv";
    prepare_metrics_file(metrics_path, summary.first_epoch);

    quantum::reset_circuit_evaluations();
    const std::size_t T = config.train.total_epochs;
    std::size_t epoch = summary.first_epoch;
    for (; epoch < T; ++epoch) {
        if (options.stop_after > 0 && epoch >= options.stop_after) {
            break;
        }
        const auto epoch_log =
            train::train_epoch(net, optimizer, train_set, sampler, rng, config.train, epoch);
        const auto metrics =
            train::compute_metrics(train::evaluate(net, val_set, config.train.batch_size));
        summary.final_val = metrics;
        {
            std::ofstream out(metrics_path, std::ios::app);
            out << epoch << ',' << fixed6(epoch_log.lr) << ',' << fixed6(epoch_log.mean_loss)
                << ',' << fixed6(metrics.accuracy) << ',' << fixed6(metrics.flooded.f1) << ','
                << fixed6(metrics.non_flooded.f1) << '\n';
        }
        log << "epoch " << epoch << " lr " << fixed6(epoch_log.lr) << " loss "
            << fixed6(epoch_log.mean_loss) << " grad_norm " << fixed6(epoch_log.grad_norm)
            << " val_acc " << fixed6(metrics.accuracy) << " val_macro_f1 "
            << fixed6(metrics.macro_f1) << '\n';

        const bool improved = metrics.macro_f1 > summary.best_score;
        if (improved) {
            summary.best_score = metrics.macro_f1;
            best_epoch = epoch;
        }
        const Checkpoint ckpt = snapshot(config, net, optimizer, epoch + 1, summary.best_score,
                                         best_epoch, rng, sampler);
        ckpt.save(out_dir / "ckpt_last.qvck");
        if (improved) {
            ckpt.save(out_dir / "ckpt_best.qvck");
        }
        if (config.output.checkpoint_every > 0 && (epoch + 1) % config.output.checkpoint_every == 0) {
            ckpt.save(out_dir / snapshot_name(epoch + 1));
        }
    }
    summary.epochs_completed = epoch;
    summary.circuit_evaluations = quantum::circuit_evaluations();
    return summary;
}

EvalReport run_eval(const fs::path &checkpoint, data::Split split,
                    const std::optional<std::string> &data_root,
                    const std::optional<RunConfig> &expected, std::size_t workers) {
    const Checkpoint ckpt = Checkpoint::load(checkpoint);
    RunConfig config = RunConfig::from_json(ckpt.config_json);
    if (expected && expected->model_json() != config.model_json()) {
        throw ConfigError("model: configuration does not match checkpoint '" +
                          checkpoint.string() + "'");
    }
    if (data_root) {
        config.data.root = *data_root;
    }
    config.validate(true);
    model::HybridModel<float> net(config.model, seed_plan(config.seed).init);
    restore_model(ckpt, net);

    std::ostringstream quiet;
    const auto manifest = prepare_manifest(config, quiet);
    const auto set = load_split(manifest, split, config, workers);
    if (set.size() == 0) {
        throw ConfigError("split '" + data::to_string(split) + "' is empty");
    }
    EvalReport report;
    report.split = data::to_string(split);
    report.confusion = train::evaluate(net, set, config.train.batch_size);
    report.metrics = train::compute_metrics(report.confusion);
    return report;
}

void print_report(const EvalReport &report, std::ostream &out) {
    const auto &m = report.metrics;
    const auto &cm = report.confusion;
    auto row = [&out](const char *name, const train::ClassMetrics &c) {
        out << std::left << std::setw(13) << name << std::right << std::fixed
            << std::setprecision(4) << std::setw(10) << c.precision << std::setw(10) << c.recall
            << std::setw(10) << c.f1 << std::setw(9) << c.support
            << (c.degenerate ? "  (zero denominator)" : "") << '\n';
    };
    out << "split: " << report.split << " (" << cm.total() << " tiles)\n";
    out << std::left << std::setw(13) << "class" << std::right << std::setw(10) << "precision"
        << std::setw(10) << "recall" << std::setw(10) << "f1" << std::setw(9) << "support"
        << '\n';
    row("Flooded", m.flooded);
    row("Non-Flooded", m.non_flooded);
    out << std::fixed << std::setprecision(4) << "accuracy " << m.accuracy << "  macro_f1 "
        << m.macro_f1 << "  weighted_f1 " << m.weighted_f1 << '\n';
    out << "confusion (rows truth, cols predicted: Flooded, Non-Flooded)\n";
    out << "  Flooded      " << cm.tp << ' ' << cm.fn << '\n';
    out << "  Non-Flooded  " << cm.fp << ' ' << cm.tn << '\n';
}

void write_confusion_csv(const train::ConfusionMatrix &cm, const fs::path &path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write confusion matrix '" + path.string() + "'");
    }
    out << "truth,pred_flooded,pred_non_flooded\n";
    out << "flooded," << cm.tp << ',' << cm.fn << '\n';
    out << "non_flooded," << cm.fp << ',' << cm.tn << '\n';
}

Prediction run_predict(const fs::path &checkpoint, const fs::path &tile) {
    const Checkpoint ckpt = Checkpoint::load(checkpoint);
    const RunConfig config = RunConfig::from_json(ckpt.config_json);
    config.validate(false);
    model::HybridModel<float> net(config.model, seed_plan(config.seed).init);
    restore_model(ckpt, net);

    const auto raster = data::read_raster(tile, config.data.band);
    const auto verdict = data::quality_filter(raster);
    if (!verdict.keep) {
        throw ContractError("tile '" + tile.string() + "' rejected by the quality filter (" +
                            data::to_string(*verdict.reason) + ")");
    }
    const std::vector<data::Image> images{data::preprocess_tile(raster, config.data.preprocess)};
    const std::size_t index = 0;
    NoGradGuard guard;
    const auto logits = net.forward(train::make_batch<float>(images, std::span(&index, 1)),
                                    RunContext{false, nullptr});
    const auto probs = ops::softmax(logits);
    Prediction p;
    p.p_non_flooded = probs.data()[data::kNonFlooded];
    p.p_flooded = probs.data()[data::kFlooded];
    p.label = p.p_flooded > p.p_non_flooded ? data::kFlooded : data::kNonFlooded;
    return p;
}

} // namespace qviton::cli
