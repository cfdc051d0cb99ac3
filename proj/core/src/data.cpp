// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/data.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "qviton/error.hpp"

namespace qviton::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<std::uint64_t> augment_counter{0};

} // namespace

std::string to_string(Split split) {
    switch (split) {
    case Split::Train:
        return "train";
    case Split::Val:
        return "val";
    case Split::Test:
        return "test";
    case Split::Unassigned:
        break;
    }
    return "unassigned";
}

Split split_from_string(const std::string &name) {
    if (name == "train") {
        return Split::Train;
    }
    if (name == "val") {
        return Split::Val;
    }
    if (name == "test") {
        return Split::Test;
    }
    throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

std::array<std::size_t, 2> DatasetManifest::class_counts(Split split) const {
    std::array<std::size_t, 2> counts{0, 0};
    for (const auto &s : samples) {
        if (s.split == split) {
            ++counts[static_cast<std::size_t>(s.label)];
        }
    }
    return counts;
}

std::vector<Sample> DatasetManifest::in_split(Split split) const {
    std::vector<Sample> out;
    std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
                 [split](const Sample &s) { return s.split == split; });
    return out;
}

DatasetManifest scan_dataset(const fs::path &root) {
    if (!fs::is_directory(root)) {
        throw IoError("dataset root '" + root.string() + "' is not a directory");
    }
    std::unordered_map<std::string, bool> flooding;
    const fs::path meta_path = root / "metadata.json";
    if (fs::exists(meta_path)) {
        std::ifstream in(meta_path);
        json meta;
        try {
            meta = json::parse(in);
        } catch (const json::exception &e) {
            throw IoError("malformed metadata '" + meta_path.string() + "': " + e.what());
        }
        if (!meta.is_object()) {
            throw IoError("metadata '" + meta_path.string() + "' must be a JSON object");
        }
        for (const auto &[region, entry] : meta.items()) {
            if (!entry.is_object() || !entry.contains("flooding") ||
                !entry["flooding"].is_boolean()) {
                throw IoError("metadata entry for region '" + region +
                              "' lacks a boolean 'flooding' field");
            }
            flooding[region] = entry["flooding"].get<bool>();
        }
    }

    std::vector<fs::path> files;
    for (const auto &entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && is_raster_file(entry.path())) {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw IoError("no raster tiles found under '" + root.string() + "'");
    }
    std::sort(files.begin(), files.end());

    DatasetManifest manifest;
    std::set<std::string> missing;
    for (const auto &file : files) {
        Sample s;
        s.path = file.string();
        s.region_id = file.parent_path().lexically_relative(root).generic_string();
        auto it = flooding.find(s.region_id);
        if (it == flooding.end()) {
            missing.insert(s.region_id);
            s.label = kNonFlooded;
        } else {
            s.label = it->second ? kFlooded : kNonFlooded;
        }
        manifest.samples.push_back(std::move(s));
    }
    manifest.regions_missing_metadata = missing.size();
    return manifest;
}

std::string to_string(DiscardReason reason) {
    switch (reason) {
    case DiscardReason::Corrupt:
        return "corrupt";
    case DiscardReason::Uniform:
        return "uniform";
    case DiscardReason::LowVariance:
        return "low_variance";
    }
    return "unknown";
}

FilterVerdict quality_filter(const std::optional<RasterTile> &tile,
                             const QualityOptions &options) {
    if (!tile || tile->values.empty() || tile->values.size() != tile->width * tile->height) {
        return {false, DiscardReason::Corrupt};
    }
    const auto &v = tile->values;
    if (std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); })) {
        return {false, DiscardReason::Corrupt};
    }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*lo == *hi) {
        return {false, DiscardReason::Uniform};
    }
    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    std::size_t run = 1, longest = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        run = sorted[i] == sorted[i - 1] ? run + 1 : 1;
        longest = std::max(longest, run);
    }
    if (static_cast<double>(longest) > options.dominant_fraction * static_cast<double>(v.size())) {
        return {false, DiscardReason::Uniform};
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) {
        var += (x - mean) * (x - mean);
    }
    var /= static_cast<double>(v.size());
    const double range = *hi - *lo;
    if (var < options.variance_fraction * range * range) {
        return {false, DiscardReason::LowVariance};
    }
    return {true, std::nullopt};
}

void curate(DatasetManifest &manifest, std::size_t band, const QualityOptions &options) {
    std::vector<Sample> kept;
    for (auto &s : manifest.samples) {
        std::optional<RasterTile> tile;
        try {
            tile = read_raster(s.path, band);
        } catch (const IoError &) {
            tile.reset();
        }
        const FilterVerdict verdict = quality_filter(tile, options);
        if (verdict.keep) {
            kept.push_back(std::move(s));
        } else {
            ++manifest.discarded[to_string(*verdict.reason)];
        }
    }
    manifest.samples = std::move(kept);
}

RasterTile median_filter3(const RasterTile &tile) {
    RasterTile out = tile;
    const auto W = static_cast<std::ptrdiff_t>(tile.width);
    const auto H = static_cast<std::ptrdiff_t>(tile.height);
    std::array<double, 9> window{};
    for (std::ptrdiff_t y = 0; y < H; ++y) {
        for (std::ptrdiff_t x = 0; x < W; ++x) {
            std::size_t k = 0;
            for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
                for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                    const auto yy = std::clamp<std::ptrdiff_t>(y + dy, 0, H - 1);
                    const auto xx = std::clamp<std::ptrdiff_t>(x + dx, 0, W - 1);
                    window[k++] = tile.values[static_cast<std::size_t>(yy * W + xx)];
                }
            }
            std::nth_element(window.begin(), window.begin() + 4, window.end());
            out.values[static_cast<std::size_t>(y * W + x)] = window[4];
        }
    }
    return out;
}

RasterTile percentile_stretch(const RasterTile &tile, double low, double high) {
    if (!(low >= 0.0 && low < high && high <= 100.0)) {
        throw ConfigError("percentile stretch bounds must satisfy 0 <= low < high <= 100");
    }
    std::vector<double> sorted(tile.values);
    std::sort(sorted.begin(), sorted.end());
    auto percentile = [&](double p) {
        const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
        const auto i = static_cast<std::size_t>(std::floor(pos));
        const std::size_t j = std::min(i + 1, sorted.size() - 1);
        return sorted[i] + (pos - static_cast<double>(i)) * (sorted[j] - sorted[i]);
    };
    const double lo = percentile(low), hi = percentile(high);
    RasterTile out = tile;
    for (double &v : out.values) {
        v = std::clamp(v, lo, hi);
    }
    return out;
}

RasterTile to_intensity8(const RasterTile &tile) {
    const auto [lo, hi] = std::minmax_element(tile.values.begin(), tile.values.end());
    if (lo == tile.values.end() || *lo == *hi) {
        throw ContractError("min-max normalization of a constant tile");
    }
    const double min = *lo, span = *hi - *lo;
    RasterTile out = tile;
    for (double &v : out.values) {
        v = std::nearbyint(255.0 * (v - min) / span);
    }
    return out;
}

RasterTile resize_bilinear(const RasterTile &tile, std::size_t size) {
    if (size == 0) {
        throw ConfigError("resize target must be positive");
    }
    RasterTile out;
    out.width = out.height = size;
    out.values.resize(size * size);
    const double sy = static_cast<double>(tile.height) / static_cast<double>(size);
    const double sx = static_cast<double>(tile.width) / static_cast<double>(size);
    auto coord = [](double c, std::size_t extent) {
        c = std::clamp(c, 0.0, static_cast<double>(extent - 1));
        const auto i0 = static_cast<std::size_t>(std::floor(c));
        const std::size_t i1 = std::min(i0 + 1, extent - 1);
        return std::tuple{i0, i1, c - static_cast<double>(i0)};
    };
    for (std::size_t y = 0; y < size; ++y) {
        const auto [y0, y1, wy] = coord((static_cast<double>(y) + 0.5) * sy - 0.5, tile.height);
        for (std::size_t x = 0; x < size; ++x) {
            const auto [x0, x1, wx] =
                coord((static_cast<double>(x) + 0.5) * sx - 0.5, tile.width);
            const double top = (1 - wx) * tile.at(y0, x0) + wx * tile.at(y0, x1);
            const double bottom = (1 - wx) * tile.at(y1, x0) + wx * tile.at(y1, x1);
            out.values[y * size + x] = (1 - wy) * top + wy * bottom;
        }
    }
    return out;
}

Image preprocess_tile(const RasterTile &tile, const PreprocessOptions &options) {
    RasterTile work = tile;
    if (options.median_filter) {
        work = median_filter3(work);
    }
    if (options.percentile_stretch) {
        work = percentile_stretch(work, options.stretch_low, options.stretch_high);
    }
    const RasterTile resized = resize_bilinear(to_intensity8(work), options.size);
    Image img;
    img.channels = 3;
    img.size = options.size;
    const std::size_t plane = options.size * options.size;
    img.pixels.resize(3 * plane);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < plane; ++i) {
            img.pixels[c * plane + i] = static_cast<float>(
                (resized.values[i] / 255.0 - options.mean[c]) / options.std[c]);
        }
    }
    return img;
}

std::vector<Image> load_images(const std::vector<Sample> &samples, std::size_t band,
                               const PreprocessOptions &options, std::size_t workers) {
    std::vector<Image> images(samples.size());
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = std::min(workers, std::max<std::size_t>(1, samples.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(workers);
    auto work = [&](std::size_t worker) {
        try {
            for (std::size_t i = next++; i < samples.size(); i = next++) {
                images[i] = preprocess_tile(read_raster(samples[i].path, band), options);
            }
        } catch (const std::exception &e) {
            errors[worker] = e.what();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
    }
    for (const auto &e : errors) {
        if (!e.empty()) {
            throw IoError("preprocessing failed: " + e);
        }
    }
    return images;
}

std::string to_string(SplitGranularity granularity) {
    return granularity == SplitGranularity::Region ? "region" : "tile";
}

SplitGranularity granularity_from_string(const std::string &name) {
    if (name == "region") {
        return SplitGranularity::Region;
    }
    if (name == "tile") {
        return SplitGranularity::Tile;
    }
    throw ConfigError("unknown split granularity '" + name + "' (expected region or tile)");
}

void split_dataset(DatasetManifest &manifest, const std::array<double, 3> &ratios,
                   std::uint64_t seed, SplitGranularity granularity) {
    for (double r : ratios) {
        if (!(r >= 0.0)) {
            throw ConfigError("split ratios must be non-negative");
        }
    }
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1");
    }
    Rng rng(seed);
    auto shuffle = [&rng](auto &items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[uniform_index(rng, i)]);
        }
    };
    const std::size_t n = manifest.samples.size();

    if (granularity == SplitGranularity::Tile) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        shuffle(order);
        const auto n_train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n)));
        const auto n_val = std::min(
            n - n_train, static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n))));
        for (std::size_t i = 0; i < n; ++i) {
            manifest.samples[order[i]].split =
                i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
        }
        return;
    }

    std::map<std::string, std::vector<std::size_t>> by_region;
    for (std::size_t i = 0; i < n; ++i) {
        by_region[manifest.samples[i].region_id].push_back(i);
    }
    std::vector<std::string> regions;
    for (const auto &[id, members] : by_region) {
        regions.push_back(id);
    }
    shuffle(regions);
    const double b1 = ratios[0] * static_cast<double>(n);
    const double b2 = (ratios[0] + ratios[1]) * static_cast<double>(n);
    double cumulative = 0.0;
    for (const auto &id : regions) {
        const auto &members = by_region[id];
        const double mid = cumulative + 0.5 * static_cast<double>(members.size());
        const Split split = mid < b1 ? Split::Train : (mid < b2 ? Split::Val : Split::Test);
        for (std::size_t i : members) {
            manifest.samples[i].split = split;
        }
        cumulative += static_cast<double>(members.size());
    }
}

void write_manifest_jsonl(const DatasetManifest &manifest, const fs::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write manifest '" + path.string() + "'");
    }
    for (const auto &s : manifest.samples) {
        json line{{"path", s.path},
                  {"region_id", s.region_id},
                  {"label", s.label},
                  {"split", to_string(s.split)}};
        out << line.dump() << '\n';
    }
}

WeightedSampler::WeightedSampler(const std::vector<int> &labels, std::uint64_t seed)
    : rng_(seed) {
    std::array<std::size_t, 2> counts{0, 0};
    for (int y : labels) {
        if (y != kNonFlooded && y != kFlooded) {
            throw ConfigError("sampler: label " + std::to_string(y) + " is not binary");
        }
        ++counts[static_cast<std::size_t>(y)];
    }
    if (counts[0] == 0 || counts[1] == 0) {
        throw ConfigError("sampler: training split must contain both classes");
    }
    cumulative_.reserve(labels.size());
    double total = 0.0;
    for (int y : labels) {
        total += 1.0 / static_cast<double>(counts[static_cast<std::size_t>(y)]);
        cumulative_.push_back(total);
    }
}

std::size_t WeightedSampler::next() {
    const double u = uniform01(rng_) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

double WeightedSampler::probability(std::size_t index) const {
    const double lo = index == 0 ? 0.0 : cumulative_.at(index - 1);
    return (cumulative_.at(index) - lo) / cumulative_.back();
}

Image hflip(const Image &image) {
    Image out = image;
    const std::size_t S = image.size;
    for (std::size_t c = 0; c < image.channels; ++c) {
        for (std::size_t y = 0; y < S; ++y) {
            for (std::size_t x = 0; x < S; ++x) {
                out.pixels[(c * S + y) * S + x] = image.pixels[(c * S + y) * S + (S - 1 - x)];
            }
        }
    }
    return out;
}

Image vflip(const Image &image) {
    Image out = image;
    const std::size_t S = image.size;
    for (std::size_t c = 0; c < image.channels; ++c) {
        for (std::size_t y = 0; y < S; ++y) {
            std::copy_n(image.pixels.begin() + static_cast<std::ptrdiff_t>((c * S + S - 1 - y) * S), S,
                        out.pixels.begin() + static_cast<std::ptrdiff_t>((c * S + y) * S));
        }
    }
    return out;
}

Image rot90(const Image &image, std::size_t quarter_turns) {
    Image out = image;
    const std::size_t S = image.size;
    for (std::size_t t = 0; t < quarter_turns % 4; ++t) {
        Image src = out;
        for (std::size_t c = 0; c < image.channels; ++c) {
            for (std::size_t y = 0; y < S; ++y) {
                for (std::size_t x = 0; x < S; ++x) {
                    // counter-clockwise: out(y, x) = in(x, S-1-y)
                    out.pixels[(c * S + y) * S + x] = src.pixels[(c * S + x) * S + (S - 1 - y)];
                }
            }
        }
    }
    return out;
}

Image augment(const Image &image, Rng &rng, const AugmentOptions &options) {
    augment_counter.fetch_add(1, std::memory_order_relaxed);
    Image out = image;
    if (uniform01(rng) < options.p_hflip) {
        out = hflip(out);
    }
    if (uniform01(rng) < options.p_vflip) {
        out = vflip(out);
    }
    if (options.rotate90) {
        const auto k = static_cast<std::size_t>(uniform_index(rng, 4));
        if (k != 0) {
            out = rot90(out, k);
        }
    }
    return out;
}

std::uint64_t augment_invocations() { return augment_counter.load(std::memory_order_relaxed); }
void reset_augment_invocations() { augment_counter.store(0, std::memory_order_relaxed); }

namespace {

// Bilinearly upsampled random lattice in [-1, 1].
std::vector<double> value_noise(std::size_t size, std::size_t cells, Rng &rng) {
    const std::size_t n = cells + 1;
    std::vector<double> lattice(n * n);
    for (double &v : lattice) {
        v = 2.0 * uniform01(rng) - 1.0;
    }
    std::vector<double> out(size * size);
    for (std::size_t y = 0; y < size; ++y) {
        const double fy = static_cast<double>(y) * static_cast<double>(cells) / static_cast<double>(size);
        const auto y0 = static_cast<std::size_t>(fy);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < size; ++x) {
            const double fx =
                static_cast<double>(x) * static_cast<double>(cells) / static_cast<double>(size);
            const auto x0 = static_cast<std::size_t>(fx);
            const double wx = fx - static_cast<double>(x0);
            const double top = (1 - wx) * lattice[y0 * n + x0] + wx * lattice[y0 * n + x0 + 1];
            const double bot =
                (1 - wx) * lattice[(y0 + 1) * n + x0] + wx * lattice[(y0 + 1) * n + x0 + 1];
            out[y * size + x] = (1 - wy) * top + wy * bot;
        }
    }
    return out;
}

} // namespace

RasterTile synth_tile(std::size_t size, bool flooded, Rng &rng) {
    RasterTile tile;
    tile.width = tile.height = size;
    tile.values.resize(size * size);
    const double base = 1800.0 + 800.0 * uniform01(rng);
    const auto coarse = value_noise(size, 4, rng);
    const auto fine = value_noise(size, 16, rng);
    for (std::size_t i = 0; i < tile.values.size(); ++i) {
        const double speckle = std::clamp(1.0 + 0.12 * standard_normal(rng), 0.6, 1.4);
        tile.values[i] = (base + 450.0 * coarse[i] + 150.0 * fine[i]) * speckle;
    }
    if (!flooded) {
        return tile;
    }
    const auto wobble = value_noise(size, 6, rng);
    const std::size_t n_blobs = 1 + static_cast<std::size_t>(uniform_index(rng, 2));
    const double S = static_cast<double>(size);
    for (std::size_t b = 0; b < n_blobs; ++b) {
        const double cy = S * (0.25 + 0.5 * uniform01(rng));
        const double cx = S * (0.25 + 0.5 * uniform01(rng));
        const double ry = S * (0.18 + 0.14 * uniform01(rng));
        const double rx = S * (0.18 + 0.14 * uniform01(rng));
        for (std::size_t y = 0; y < size; ++y) {
            for (std::size_t x = 0; x < size; ++x) {
                const double dy = (static_cast<double>(y) - cy) / ry;
                const double dx = (static_cast<double>(x) - cx) / rx;
                if (dy * dy + dx * dx < 1.0 + 0.35 * wobble[y * size + x]) {
                    tile.values[y * size + x] =
                        std::max(0.0, 160.0 + 35.0 * standard_normal(rng));
                }
            }
        }
    }
    return tile;
}

void synth_generate(const SynthOptions &options, const fs::path &out_dir) {
    if (options.n_regions == 0 || options.tiles_per_region == 0) {
        throw ConfigError("synth: regions and tiles per region must be positive");
    }
    if (options.tile_size < 16) {
        throw ConfigError("synth: tile size must be at least 16");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw IoError("cannot create output directory '" + out_dir.string() + "'");
    }
    Rng rng(options.seed);
    // Half of the regions (rounded down) are flooded, chosen by a seeded shuffle.
    std::vector<std::size_t> order(options.n_regions);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    std::vector<bool> flooded(options.n_regions, false);
    for (std::size_t i = 0; i < options.n_regions / 2; ++i) {
        flooded[order[i]] = true;
    }

    json meta = json::object();
    for (std::size_t r = 0; r < options.n_regions; ++r) {
        std::ostringstream name;
        name << "region_" << std::setw(3) << std::setfill('0') << r;
        const fs::path dir = out_dir / name.str();
        fs::create_directories(dir, ec);
        if (ec) {
            throw IoError("cannot create region directory '" + dir.string() + "'");
        }
        meta[name.str()] = {{"flooding", static_cast<bool>(flooded[r])}};
        for (std::size_t t = 0; t < options.tiles_per_region; ++t) {
            std::ostringstream tile_name;
            tile_name << "tile_" << std::setw(3) << std::setfill('0') << t << ".pgm";
            write_pgm(dir / tile_name.str(), synth_tile(options.tile_size, flooded[r], rng));
        }
    }
    std::ofstream out(out_dir / "metadata.json");
    if (!out) {
        throw IoError("cannot write metadata in '" + out_dir.string() + "'");
    }
    out << meta.dump(2) << '\n';
}

} // namespace qviton::data
