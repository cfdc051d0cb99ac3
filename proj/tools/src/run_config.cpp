// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton_cli/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qviton/error.hpp"

namespace qviton::cli {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad_type(const std::string &path, const char *expected) {
    throw ConfigError(path + ": expected " + expected);
}

double get_number(const json &v, const std::string &path) {
    if (!v.is_number()) {
        bad_type(path, "a number");
    }
    return v.get<double>();
}

std::uint64_t get_count(const json &v, const std::string &path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        bad_type(path, "a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

bool get_bool(const json &v, const std::string &path) {
    if (!v.is_boolean()) {
        bad_type(path, "a boolean");
    }
    return v.get<bool>();
}

std::string get_string(const json &v, const std::string &path) {
    if (!v.is_string()) {
        bad_type(path, "a string");
    }
    return v.get<std::string>();
}

// Rethrows a ConfigError from a string parser with the field path prefixed.
template <typename F> auto parse_enum(const json &v, const std::string &path, F &&parse) {
    const std::string text = get_string(v, path);
    try {
        return parse(text);
    } catch (const ConfigError &e) {
        throw ConfigError(path + ": " + e.what());
    }
}

using Setter = std::function<void(const json &, const std::string &)>;

void apply_object(const json &obj, const std::string &path,
                  const std::map<std::string, Setter> &setters) {
    if (!obj.is_object()) {
        bad_type(path.empty() ? "<root>" : path, "an object");
    }
    for (const auto &[key, value] : obj.items()) {
        const std::string field = path.empty() ? key : path + "." + key;
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError(field + ": unknown field");
        }
        it->second(value, field);
    }
}

template <typename T> std::vector<T> get_list(const json &v, const std::string &path,
                                              const std::function<T(const json &, const std::string &)> &item) {
    if (!v.is_array()) {
        bad_type(path, "an array");
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(item(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

void apply_document(RunConfig &c, const json &doc) {
    auto &d = c.data;
    auto &m = c.model;
    auto &t = c.train;
    const std::map<std::string, Setter> data_setters{
        {"root", [&](const json &v, const std::string &p) { d.root = get_string(v, p); }},
        {"band", [&](const json &v, const std::string &p) { d.band = get_count(v, p); }},
        {"image_size",
         [&](const json &v, const std::string &p) {
             d.preprocess.size = get_count(v, p);
             m.vit.image_size = d.preprocess.size;
         }},
        {"split_ratios",
         [&](const json &v, const std::string &p) {
             const auto r = get_list<double>(v, p, get_number);
             if (r.size() != 3) {
                 throw ConfigError(p + ": expected three ratios (train, val, test)");
             }
             d.split_ratios = {r[0], r[1], r[2]};
         }},
        {"granularity",
         [&](const json &v, const std::string &p) {
             d.granularity = parse_enum(v, p, data::granularity_from_string);
         }},
        {"median_filter",
         [&](const json &v, const std::string &p) { d.preprocess.median_filter = get_bool(v, p); }},
        {"percentile_stretch",
         [&](const json &v, const std::string &p) {
             d.preprocess.percentile_stretch = get_bool(v, p);
         }},
    };
    const std::map<std::string, Setter> model_setters{
        {"patch_size", [&](const json &v, const std::string &p) { m.vit.patch_size = get_count(v, p); }},
        {"d_model", [&](const json &v, const std::string &p) { m.vit.d_model = get_count(v, p); }},
        {"n_layers", [&](const json &v, const std::string &p) { m.vit.n_layers = get_count(v, p); }},
        {"n_heads", [&](const json &v, const std::string &p) { m.vit.n_heads = get_count(v, p); }},
        {"d_mlp", [&](const json &v, const std::string &p) { m.vit.d_mlp = get_count(v, p); }},
        {"hidden",
         [&](const json &v, const std::string &p) {
             const auto h = get_list<std::uint64_t>(v, p, get_count);
             m.hidden.assign(h.begin(), h.end());
         }},
        {"dropout",
         [&](const json &v, const std::string &p) { m.dropout = get_list<double>(v, p, get_number); }},
        {"circuit_layers",
         [&](const json &v, const std::string &p) { m.quanv.circuit_layers = get_count(v, p); }},
        {"observable_qubit",
         [&](const json &v, const std::string &p) { m.quanv.observable_qubit = get_count(v, p); }},
    };
    const std::map<std::string, Setter> train_setters{
        {"lr_max", [&](const json &v, const std::string &p) { t.lr_max = get_number(v, p); }},
        {"weight_decay", [&](const json &v, const std::string &p) { t.weight_decay = get_number(v, p); }},
        {"beta1", [&](const json &v, const std::string &p) { t.beta1 = get_number(v, p); }},
        {"beta2", [&](const json &v, const std::string &p) { t.beta2 = get_number(v, p); }},
        {"eps", [&](const json &v, const std::string &p) { t.eps = get_number(v, p); }},
        {"warmup_epochs", [&](const json &v, const std::string &p) { t.warmup_epochs = get_count(v, p); }},
        {"total_epochs", [&](const json &v, const std::string &p) { t.total_epochs = get_count(v, p); }},
        {"batch_size", [&](const json &v, const std::string &p) { t.batch_size = get_count(v, p); }},
        {"clip_gradients", [&](const json &v, const std::string &p) { t.clip_gradients = get_bool(v, p); }},
        {"clip_norm", [&](const json &v, const std::string &p) { t.clip_norm = get_number(v, p); }},
        {"augment", [&](const json &v, const std::string &p) { t.augment = get_bool(v, p); }},
        {"schedule",
         [&](const json &v, const std::string &p) {
             t.schedule = parse_enum(v, p, train::schedule_from_string);
         }},
    };
    const std::map<std::string, Setter> output_setters{
        {"dir", [&](const json &v, const std::string &p) { c.output.dir = get_string(v, p); }},
        {"checkpoint_every",
         [&](const json &v, const std::string &p) { c.output.checkpoint_every = get_count(v, p); }},
    };
    const std::map<std::string, Setter> root{
        {"preset", [](const json &, const std::string &) {}},
        {"mode",
         [&](const json &v, const std::string &p) { m.mode = parse_enum(v, p, model::mode_from_string); }},
        {"seed", [&](const json &v, const std::string &p) { c.seed = get_count(v, p); }},
        {"workers", [&](const json &v, const std::string &p) { c.workers = get_count(v, p); }},
        {"data", [&](const json &v, const std::string &p) { apply_object(v, p, data_setters); }},
        {"model", [&](const json &v, const std::string &p) { apply_object(v, p, model_setters); }},
        {"train", [&](const json &v, const std::string &p) { apply_object(v, p, train_setters); }},
        {"output", [&](const json &v, const std::string &p) { apply_object(v, p, output_setters); }},
    };
    apply_object(doc, "", root);
}

ordered_json model_section(const RunConfig &c) {
    const auto &m = c.model;
    return ordered_json{
        {"mode", model::to_string(m.mode)},
        {"image_size", m.vit.image_size},
        {"patch_size", m.vit.patch_size},
        {"d_model", m.vit.d_model},
        {"n_layers", m.vit.n_layers},
        {"n_heads", m.vit.n_heads},
        {"d_mlp", m.vit.d_mlp},
        {"hidden", m.hidden},
        {"dropout", m.dropout},
        {"circuit_layers", m.quanv.circuit_layers},
        {"observable_qubit", m.quanv.observable_qubit},
    };
}

} // namespace

RunConfig RunConfig::preset_config(const std::string &name) {
    RunConfig c;
    c.preset = name;
    if (name == "toy") {
        c.model = model::ModelConfig::toy();
        c.data.preprocess.size = c.model.vit.image_size;
        c.train.lr_max = 1e-3;
        c.train.total_epochs = 30;
        c.train.warmup_epochs = 5;
        c.train.batch_size = 16;
        c.output.checkpoint_every = 10;
    } else if (name == "paper") {
        c.model = model::ModelConfig::paper();
        c.data.preprocess.size = c.model.vit.image_size;
        c.train.lr_max = 1e-4;
        c.train.total_epochs = 50;
        c.train.warmup_epochs = 5;
        c.train.batch_size = 16;
    } else {
        throw ConfigError("preset: unknown preset '" + name + "' (expected toy or paper)");
    }
    return c;
}

RunConfig RunConfig::from_json(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("<root>: expected an object");
    }
    std::string preset = "toy";
    if (doc.contains("preset")) {
        preset = get_string(doc["preset"], "preset");
    }
    RunConfig c = preset_config(preset);
    apply_document(c, doc);
    return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config file '" + path.string() + "' cannot be read");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return from_json(text.str());
}

std::string RunConfig::to_json() const {
    const auto &p = data.preprocess;
    ordered_json m = model_section(*this);
    m.erase("mode");
    m.erase("image_size");
    const ordered_json doc{
        {"preset", preset},
        {"mode", model::to_string(model.mode)},
        {"seed", seed},
        {"workers", workers},
        {"data",
         {{"root", data.root},
          {"band", data.band},
          {"image_size", p.size},
          {"split_ratios", data.split_ratios},
          {"granularity", data::to_string(data.granularity)},
          {"median_filter", p.median_filter},
          {"percentile_stretch", p.percentile_stretch}}},
        {"model", m},
        {"train",
         {{"lr_max", train.lr_max},
          {"weight_decay", train.weight_decay},
          {"beta1", train.beta1},
          {"beta2", train.beta2},
          {"eps", train.eps},
          {"warmup_epochs", train.warmup_epochs},
          {"total_epochs", train.total_epochs},
          {"batch_size", train.batch_size},
          {"clip_gradients", train.clip_gradients},
          {"clip_norm", train.clip_norm},
          {"augment", train.augment},
          {"schedule", train::to_string(train.schedule)}}},
        {"output", {{"dir", output.dir}, {"checkpoint_every", output.checkpoint_every}}},
    };
    return doc.dump(2);
}

std::string RunConfig::model_json() const { return model_section(*this).dump(); }

void RunConfig::validate(bool check_paths) const {
    auto field = [](const std::string &path, auto &&fn) {
        try {
            fn();
        } catch (const ConfigError &e) {
            throw ConfigError(path + ": " + e.what());
        }
    };
    field("model", [&] { model.validate(); });
    field("train", [&] { train.validate(); });
    if (data.preprocess.size != model.vit.image_size) {
        throw ConfigError("data.image_size: must equal the ViT input size");
    }
    if (data.preprocess.size < 16) {
        throw ConfigError("data.image_size: must be at least 16");
    }
    double total = 0.0;
    for (double r : data.split_ratios) {
        if (!(r >= 0.0)) {
            throw ConfigError("data.split_ratios: ratios must be non-negative");
        }
        total += r;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("data.split_ratios: ratios must sum to 1");
    }
    if (check_paths) {
        if (data.root.empty()) {
            throw ConfigError("data.root: required");
        }
        if (!std::filesystem::is_directory(data.root)) {
            throw ConfigError("data.root: '" + data.root + "' is not a directory");
        }
    }
}

void apply_seed_override(RunConfig &config) {
    const char *env = std::getenv("QVITON_SEED");
    if (env == nullptr || *env == '\0') {
        return;
    }
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) {
            throw std::invalid_argument("trailing characters");
        }
        config.seed = v;
    } catch (const std::exception &) {
        throw ConfigError(std::string("QVITON_SEED: '") + env + "' is not a non-negative integer");
    }
}

SeedPlan seed_plan(std::uint64_t seed) {
    // splitmix64 steps give well-separated streams from one user seed.
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return {mix(seed * 4 + 0), mix(seed * 4 + 1), mix(seed * 4 + 2), mix(seed * 4 + 3)};
}

} // namespace qviton::cli
