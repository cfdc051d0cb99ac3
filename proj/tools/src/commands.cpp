// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton_cli/commands.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "qviton/error.hpp"
#include "qviton/verify/suite.hpp"
#include "qviton_cli/pipeline.hpp"

namespace qviton::cli {

namespace fs = std::filesystem;

namespace {

std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

int cmd_synth(const data::SynthOptions &options, const std::string &out_dir, std::ostream &out) {
    data::synth_generate(options, out_dir);
    out << "wrote " << options.n_regions * options.tiles_per_region << " tiles in "
        << options.n_regions << " regions to " << out_dir << '\n';
    return kExitOk;
}

int cmd_train(const std::string &config_path, const std::string &preset,
              const std::string &data_root, const std::string &out_dir,
              const std::string &resume, std::size_t stop_after, std::size_t workers,
              std::ostream &out) {
    RunConfig config = config_path.empty() ? RunConfig::preset_config(preset)
                                           : RunConfig::from_file(config_path);
    if (!data_root.empty()) {
        config.data.root = data_root;
    }
    if (!out_dir.empty()) {
        config.output.dir = out_dir;
    }
    apply_seed_override(config);
    TrainOptions options;
    if (!resume.empty()) {
        options.resume = resume;
    }
    options.stop_after = stop_after;
    options.workers = workers > 0 ? workers : (config.workers > 0 ? config.workers : default_workers());
    const TrainSummary s = run_training(config, options, out);
    out << "completed epochs " << s.first_epoch << ".." << s.epochs_completed << " of "
        << config.train.total_epochs << '\n';
    out << std::fixed << std::setprecision(6) << "final val accuracy " << s.final_val.accuracy
        << " f1_flood " << s.final_val.flooded.f1 << " f1_nonflood " << s.final_val.non_flooded.f1
        << '\n';
    out << "circuit evaluations " << s.circuit_evaluations << '\n';
    return kExitOk;
}

int cmd_eval(const std::string &ckpt, const std::string &split, const std::string &data_root,
             const std::string &config_path, const std::string &csv, std::size_t workers,
             std::ostream &out) {
    std::optional<RunConfig> expected;
    if (!config_path.empty()) {
        expected = RunConfig::from_file(config_path);
    }
    std::optional<std::string> root;
    if (!data_root.empty()) {
        root = data_root;
    }
    const auto report = run_eval(ckpt, data::split_from_string(split), root, expected,
                                 workers > 0 ? workers : default_workers());
    print_report(report, out);
    const fs::path csv_path =
        csv.empty() ? fs::path(ckpt).parent_path() / ("confusion_" + split + ".csv") : fs::path(csv);
    write_confusion_csv(report.confusion, csv_path);
    out << "confusion matrix written to " << csv_path.string() << '\n';
    return kExitOk;
}

int cmd_gradcheck(const std::string &scope, std::uint64_t seed, std::ostream &out) {
    const auto results = verify::run_suite(verify::scope_from_string(scope), seed);
    std::vector<const verify::CheckResult *> failed;
    for (const auto &r : results) {
        out << (r.passed() ? "ok    " : "FAIL  ") << std::left << std::setw(48)
            << (r.scope + "/" + r.name) << std::right << std::scientific << std::setprecision(3)
            << r.error << "  tol " << std::setprecision(1) << r.tolerance
            << (r.detail.empty() ? "" : "  " + r.detail) << '\n';
        if (!r.passed()) {
            failed.push_back(&r);
        }
    }
    out << results.size() - failed.size() << "/" << results.size() << " checks passed\n";
    for (const auto *r : failed) {
        out << "offender: " << r->scope << "/" << r->name << '\n';
    }
    return failed.empty() ? kExitOk : kExitVerificationFailed;
}

int cmd_predict(const std::string &ckpt, const std::string &tile, std::ostream &out) {
    const Prediction p = run_predict(ckpt, tile);
    out << "class " << (p.label == data::kFlooded ? "Flooded" : "Non-Flooded") << '\n'
        << std::fixed << std::setprecision(6) << "p_flooded " << p.p_flooded << '\n'
        << "p_non_flooded " << p.p_non_flooded << '\n';
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"qviton: hybrid quantum vision transformer for flood classification", "qviton"};
    app.require_subcommand(1);
    std::size_t workers = 0;
    app.add_option("--workers", workers, "Data-loading threads (default: available cores)");

    auto *synth = app.add_subcommand("synth", "Write a synthetic flood dataset");
    data::SynthOptions synth_options;
    std::string synth_out;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--regions", synth_options.n_regions, "Number of regions")
        ->check(CLI::PositiveNumber);
    synth->add_option("--tiles", synth_options.tiles_per_region, "Tiles per region")
        ->check(CLI::PositiveNumber);
    synth->add_option("--size", synth_options.tile_size, "Tile edge in pixels")
        ->check(CLI::Range(16, 4096));
    synth->add_option("--seed", synth_options.seed, "Generator seed");

    auto *train_cmd = app.add_subcommand("train", "Train a model");
    std::string config_path, preset = "toy", data_root, out_dir, resume;
    std::size_t stop_after = 0;
    train_cmd->add_option("--config", config_path, "JSON run configuration");
    train_cmd->add_option("--preset", preset, "Embedded preset when no --config is given")
        ->check(CLI::IsMember({"toy", "paper"}));
    train_cmd->add_option("--data", data_root, "Dataset root (overrides data.root)");
    train_cmd->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    train_cmd->add_option("--resume", resume, "Checkpoint to resume from");
    train_cmd->add_option("--stop-after", stop_after, "Stop once this many epochs are complete");

    auto *eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    std::string ckpt, split = "test", csv, eval_config, eval_data;
    eval_cmd->add_option("--ckpt", ckpt, "Checkpoint file")->required();
    eval_cmd->add_option("--split", split, "train, val or test")
        ->check(CLI::IsMember({"train", "val", "test"}));
    eval_cmd->add_option("--data", eval_data, "Dataset root (overrides the stored one)");
    eval_cmd->add_option("--config", eval_config, "Configuration the checkpoint must match");
    eval_cmd->add_option("--csv", csv, "Confusion matrix CSV path");

    auto *grad_cmd = app.add_subcommand("gradcheck", "Run oracle and finite-difference checks");
    std::string scope = "all";
    std::uint64_t grad_seed = 0;
    grad_cmd->add_option("--scope", scope, "numerics, quantum, quanv, vit, model or all")
        ->check(CLI::IsMember({"numerics", "quantum", "quanv", "vit", "model", "all"}));
    grad_cmd->add_option("--seed", grad_seed, "Seed for random test inputs");

    auto *predict_cmd = app.add_subcommand("predict", "Classify a single tile");
    std::string predict_ckpt, tile;
    predict_cmd->add_option("--ckpt", predict_ckpt, "Checkpoint file")->required();
    predict_cmd->add_option("--tile", tile, "Raster tile (.pgm or .rf32)")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*synth) {
            return cmd_synth(synth_options, synth_out, out);
        }
        if (*train_cmd) {
            return cmd_train(config_path, preset, data_root, out_dir, resume, stop_after, workers,
                             out);
        }
        if (*eval_cmd) {
            return cmd_eval(ckpt, split, eval_data, eval_config, csv, workers, out);
        }
        if (*grad_cmd) {
            return cmd_gradcheck(scope, grad_seed, out);
        }
        if (*predict_cmd) {
            return cmd_predict(predict_ckpt, tile, out);
        }
    } catch (const NumericalError &e) {
        err << "numerical abort: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace qviton::cli
