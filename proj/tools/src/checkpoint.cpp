// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton_cli/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "qviton/error.hpp"

namespace qviton::cli {

namespace {

class Writer {
  public:
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string &s) {
        u64(s.size());
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    void floats(const std::vector<float> &values) {
        u64(values.size());
        for (float v : values) {
            u32(std::bit_cast<std::uint32_t>(v));
        }
    }
    void array(const NamedArray &a) {
        str(a.name);
        u64(a.shape.size());
        for (std::size_t d : a.shape) {
            u64(d);
        }
        floats(a.values);
    }
    void raw(const char *p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
    std::vector<char> take() { return std::move(bytes_); }

  private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) {
            bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
        }
    }
    std::vector<char> bytes_;
};

class Reader {
  public:
    explicit Reader(const std::vector<char> &bytes) : bytes_(bytes) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint64_t n = u64();
        need(n);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }
    std::vector<float> floats() {
        const std::uint64_t n = u64();
        need(n * 4);
        std::vector<float> out(n);
        for (float &v : out) {
            v = std::bit_cast<float>(u32());
        }
        return out;
    }
    NamedArray array() {
        NamedArray a;
        a.name = str();
        const std::uint64_t rank = u64();
        if (rank > 8) {
            throw IoError("checkpoint: tensor '" + a.name + "' has implausible rank");
        }
        for (std::uint64_t i = 0; i < rank; ++i) {
            a.shape.push_back(u64());
        }
        a.values = floats();
        if (a.values.size() != shape_numel(a.shape)) {
            throw IoError("checkpoint: tensor '" + a.name + "' size disagrees with its shape");
        }
        return a;
    }
    void magic(const char *tag) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, tag, 4) != 0) {
            throw IoError("not a qviton checkpoint (bad magic)");
        }
        pos_ += 4;
    }
    [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

  private:
    void need(std::uint64_t n) const {
        if (n > bytes_.size() - pos_) {
            throw IoError("checkpoint truncated");
        }
    }
    std::uint64_t get(int n) {
        need(static_cast<std::uint64_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
        }
        return v;
    }
    const std::vector<char> &bytes_;
    std::size_t pos_ = 0;
};

NamedArray to_array(const std::string &name, const Tensor<float> &t) {
    return {name, t.shape(), std::vector<float>(t.data().begin(), t.data().end())};
}

void copy_into(const std::vector<NamedArray> &stored,
               const std::vector<ParamStore<float>::Entry> &targets, const char *kind) {
    if (stored.size() != targets.size()) {
        throw ConfigError(std::string("checkpoint: ") + kind + " count " +
                          std::to_string(stored.size()) + " does not match the model's " +
                          std::to_string(targets.size()));
    }
    for (std::size_t i = 0; i < stored.size(); ++i) {
        if (stored[i].name != targets[i].name || stored[i].shape != targets[i].tensor.shape()) {
            throw ConfigError("checkpoint: " + std::string(kind) + " '" + stored[i].name + "' " +
                              shape_str(stored[i].shape) + " does not match model entry '" +
                              targets[i].name + "' " + shape_str(targets[i].tensor.shape()));
        }
    }
    for (std::size_t i = 0; i < stored.size(); ++i) {
        Tensor<float> t = targets[i].tensor;
        std::copy(stored[i].values.begin(), stored[i].values.end(), t.data().begin());
    }
}

} // namespace

std::vector<char> Checkpoint::serialize() const {
    Writer w;
    w.raw("QVCK", 4);
    w.u32(kCheckpointVersion);
    w.str(config_json);
    w.u64(epoch);
    w.f64(best_score);
    w.u64(best_epoch);
    w.u64(parameters.size());
    for (const auto &p : parameters) {
        w.array(p);
    }
    w.u64(buffers.size());
    for (const auto &b : buffers) {
        w.array(b);
    }
    w.u64(optimizer_steps);
    w.u64(first_moments.size());
    for (std::size_t i = 0; i < first_moments.size(); ++i) {
        w.floats(first_moments[i]);
        w.floats(second_moments.at(i));
    }
    w.str(train_rng);
    w.str(sampler_rng);
    return w.take();
}

Checkpoint Checkpoint::deserialize(const std::vector<char> &bytes) {
    Reader r(bytes);
    r.magic("QVCK");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    c.config_json = r.str();
    c.epoch = r.u64();
    c.best_score = r.f64();
    c.best_epoch = r.u64();
    for (std::uint64_t i = 0, n = r.u64(); i < n; ++i) {
        c.parameters.push_back(r.array());
    }
    for (std::uint64_t i = 0, n = r.u64(); i < n; ++i) {
        c.buffers.push_back(r.array());
    }
    c.optimizer_steps = r.u64();
    for (std::uint64_t i = 0, n = r.u64(); i < n; ++i) {
        c.first_moments.push_back(r.floats());
        c.second_moments.push_back(r.floats());
    }
    c.train_rng = r.str();
    c.sampler_rng = r.str();
    if (!r.done()) {
        throw IoError("checkpoint has trailing bytes");
    }
    return c;
}

void Checkpoint::save(const std::filesystem::path &path) const {
    const auto bytes = serialize();
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write checkpoint '" + path.string() + "'");
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("write failed for checkpoint '" + path.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open checkpoint '" + path.string() + "'");
    }
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

Checkpoint capture(const model::HybridModel<float> &model, const train::AdamW<float> *optimizer) {
    Checkpoint c;
    for (const auto &e : model.params().parameters()) {
        c.parameters.push_back(to_array(e.name, e.tensor));
    }
    for (const auto &e : model.params().buffers()) {
        c.buffers.push_back(to_array(e.name, e.tensor));
    }
    if (optimizer != nullptr) {
        c.optimizer_steps = optimizer->steps();
        c.first_moments = optimizer->first_moments();
        c.second_moments = optimizer->second_moments();
    }
    return c;
}

void restore_model(const Checkpoint &checkpoint, model::HybridModel<float> &model) {
    copy_into(checkpoint.parameters, model.params().parameters(), "parameter");
    copy_into(checkpoint.buffers, model.params().buffers(), "buffer");
}

void restore_optimizer(const Checkpoint &checkpoint, train::AdamW<float> &optimizer) {
    auto &m = optimizer.first_moments();
    if (checkpoint.first_moments.size() != m.size()) {
        throw ConfigError("checkpoint: optimizer state does not match the model");
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (checkpoint.first_moments[i].size() != m[i].size() ||
            checkpoint.second_moments[i].size() != m[i].size()) {
            throw ConfigError("checkpoint: optimizer moment " + std::to_string(i) +
                              " has the wrong size");
        }
    }
    optimizer.first_moments() = checkpoint.first_moments;
    optimizer.second_moments() = checkpoint.second_moments;
    optimizer.set_steps(checkpoint.optimizer_steps);
}

} // namespace qviton::cli
