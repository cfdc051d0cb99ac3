// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Dataset curation and preprocessing.
 *
 * Layout on disk: `root/<region_id>/<tile>.{pgm,rf32}` with
 * `root/metadata.json` = {"<region_id>": {"flooding": true|false}, ...}.
 * Every tile inherits its region's label; regions missing from the
 * metadata default to 0 (non-flooded).
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qviton/random.hpp"
#include "qviton/raster_io.hpp"

namespace qviton::data {

inline constexpr int kNonFlooded = 0;
inline constexpr int kFlooded = 1;

enum class Split { Unassigned, Train, Val, Test };
std::string to_string(Split split);
Split split_from_string(const std::string &name);

struct Sample {
    std::string path;
    std::string region_id;
    int label = kNonFlooded;
    Split split = Split::Unassigned;
};

struct DatasetManifest {
    std::vector<Sample> samples;
    std::map<std::string, std::size_t> discarded; // reason -> count
    std::size_t regions_missing_metadata = 0;

    /// {non-flooded, flooded} counts within `split`.
    [[nodiscard]] std::array<std::size_t, 2> class_counts(Split split) const;
    [[nodiscard]] std::vector<Sample> in_split(Split split) const;
};

/// Enumerates raster tiles below `root` (sorted), labels them from
/// `root/metadata.json`. Throws IoError when no tiles are found.
DatasetManifest scan_dataset(const std::filesystem::path &root);

enum class DiscardReason { Corrupt, Uniform, LowVariance };
std::string to_string(DiscardReason reason);

struct QualityOptions {
    double variance_fraction = 1e-6; // of the squared dynamic range (max - min)^2
    double dominant_fraction = 0.99; // one value covering more than this share
};

struct FilterVerdict {
    bool keep = true;
    std::optional<DiscardReason> reason;
};

/// `tile` is empty when loading failed.
FilterVerdict quality_filter(const std::optional<RasterTile> &tile,
                             const QualityOptions &options = {});

/// Loads every sample's tile and drops the ones the filter rejects,
/// counting reasons in `discarded`.
void curate(DatasetManifest &manifest, std::size_t band = 0, const QualityOptions &options = {});

struct PreprocessOptions {
    std::size_t size = 224;
    bool median_filter = false;
    bool percentile_stretch = false;
    double stretch_low = 2.0;
    double stretch_high = 98.0;
    std::array<double, 3> mean{0.485, 0.456, 0.406};
    std::array<double, 3> std{0.229, 0.224, 0.225};
};

/// Channel-major float image [channels, size, size].
struct Image {
    std::size_t channels = 3;
    std::size_t size = 0;
    std::vector<float> pixels;
};

/// 3x3 median with replicated borders.
RasterTile median_filter3(const RasterTile &tile);
/// Clips values to the [low, high] percentiles (linear interpolation).
RasterTile percentile_stretch(const RasterTile &tile, double low, double high);
/// round(255 * (v - min) / (max - min)), ties to even; ContractError when max == min.
RasterTile to_intensity8(const RasterTile &tile);
/// Half-pixel-centred bilinear resampling to size x size.
RasterTile resize_bilinear(const RasterTile &tile, std::size_t size);

/// Full input standardization: optional denoising, 8-bit min-max,
/// three-channel replication, resize, scale to [0,1], per-channel normalize.
Image preprocess_tile(const RasterTile &tile, const PreprocessOptions &options);

/// Loads and preprocesses `samples` with `workers` threads (0 = hardware
/// concurrency). Output order matches input order.
std::vector<Image> load_images(const std::vector<Sample> &samples, std::size_t band,
                               const PreprocessOptions &options, std::size_t workers = 1);

enum class SplitGranularity { Region, Tile };
std::string to_string(SplitGranularity granularity);
SplitGranularity granularity_from_string(const std::string &name);

/// Seeded shuffle into train/val/test. With region granularity whole
/// regions move together. ConfigError when ratios do not sum to 1.
void split_dataset(DatasetManifest &manifest, const std::array<double, 3> &ratios,
                   std::uint64_t seed, SplitGranularity granularity);

/// One JSON object per line: path, region_id, label, split.
void write_manifest_jsonl(const DatasetManifest &manifest, const std::filesystem::path &path);

/// Draws training indices with replacement, probability proportional to
/// 1 / count(class of sample).
class WeightedSampler {
  public:
    WeightedSampler(const std::vector<int> &labels, std::uint64_t seed);

    std::size_t next();
    [[nodiscard]] double probability(std::size_t index) const;

    [[nodiscard]] std::string state() const { return rng_state(rng_); }
    void set_state(const std::string &state) { set_rng_state(rng_, state); }

  private:
    std::vector<double> cumulative_;
    Rng rng_;
};

struct AugmentOptions {
    double p_hflip = 0.5;
    double p_vflip = 0.5;
    bool rotate90 = true;
};

/// Random horizontal/vertical flips and a rotation by k * 90 degrees.
Image augment(const Image &image, Rng &rng, const AugmentOptions &options = {});
Image hflip(const Image &image);
Image vflip(const Image &image);
Image rot90(const Image &image, std::size_t quarter_turns);

/// Calls to augment() since the last reset.
std::uint64_t augment_invocations();
void reset_augment_invocations();

struct SynthOptions {
    std::size_t n_regions = 10;
    std::size_t tiles_per_region = 8;
    std::size_t tile_size = 64;
    std::uint64_t seed = 0;
};

/// Writes a synthetic flood dataset: flooded regions carry dark connected
/// water blobs over a speckled texture, non-flooded ones texture only.
void synth_generate(const SynthOptions &options, const std::filesystem::path &out_dir);

/// One synthetic tile (exposed for tests).
RasterTile synth_tile(std::size_t size, bool flooded, Rng &rng);

} // namespace qviton::data
