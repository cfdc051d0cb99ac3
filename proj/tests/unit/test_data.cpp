// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "qviton/data.hpp"
#include "qviton/error.hpp"
#include "test_support.hpp"

namespace qviton::data {
namespace {

using qviton::testing::TempDir;

RasterTile make_tile(std::size_t w, std::size_t h, std::vector<double> values) {
    return RasterTile{w, h, std::move(values)};
}

RasterTile textured_tile(std::size_t size, std::uint64_t seed) {
    Rng rng(seed);
    RasterTile t{size, size, std::vector<double>(size * size)};
    for (double &v : t.values) v = 1000.0 + 500.0 * uniform01(rng);
    return t;
}

void write_metadata(const std::filesystem::path &root, const std::string &json) {
    std::ofstream(root / "metadata.json") << json;
}

TEST(Scan, LabelsFromMetadataAndCountsMissingRegions) {
    TempDir dir("scan");
    for (const char *region : {"a", "b", "c"}) {
        std::filesystem::create_directories(dir / region);
        write_pgm(dir / region / "t0.pgm", textured_tile(16, 1));
    }
    write_metadata(dir.path(), R"({"a": {"flooding": true}, "b": {"flooding": false}})");
    const DatasetManifest m = scan_dataset(dir.path());
    ASSERT_EQ(m.samples.size(), 3u);
    std::map<std::string, int> labels;
    for (const auto &s : m.samples) labels[s.region_id] = s.label;
    EXPECT_EQ(labels["a"], kFlooded);
    EXPECT_EQ(labels["b"], kNonFlooded);
    EXPECT_EQ(labels["c"], kNonFlooded);
    EXPECT_EQ(m.regions_missing_metadata, 1u);
}

TEST(Scan, EmptyDirectoryIsError) {
    TempDir dir("scan_empty");
    EXPECT_THROW((void)scan_dataset(dir.path()), IoError);
    EXPECT_THROW((void)scan_dataset(dir / "missing"), IoError);
}

TEST(Filter, Verdicts) {
    const auto uniform = quality_filter(make_tile(4, 4, std::vector<double>(16, 0.0)));
    EXPECT_FALSE(uniform.keep);
    EXPECT_EQ(uniform.reason, DiscardReason::Uniform);

    const auto corrupt = quality_filter(std::nullopt);
    EXPECT_FALSE(corrupt.keep);
    EXPECT_EQ(corrupt.reason, DiscardReason::Corrupt);

    EXPECT_TRUE(quality_filter(textured_tile(16, 2)).keep);
}

TEST(Filter, CurateDropsUnreadableTile) {
    TempDir dir("curate");
    std::filesystem::create_directories(dir / "r");
    write_pgm(dir / "r" / "good.pgm", textured_tile(16, 3));
    std::ofstream(dir / "r" / "bad.pgm") << "P5\nnot a raster";
    DatasetManifest m = scan_dataset(dir.path());
    ASSERT_EQ(m.samples.size(), 2u);
    curate(m);
    ASSERT_EQ(m.samples.size(), 1u);
    EXPECT_NE(m.samples[0].path.find("good"), std::string::npos);
    EXPECT_EQ(m.discarded["corrupt"], 1u);
}

TEST(Preprocess, IntensityScaling) {
    const RasterTile same = to_intensity8(make_tile(2, 2, {0, 255, 0, 255}));
    EXPECT_EQ(same.values, (std::vector<double>{0, 255, 0, 255}));
    const RasterTile mid = to_intensity8(make_tile(3, 1, {100, 300, 200}));
    EXPECT_EQ(mid.values, (std::vector<double>{0, 255, 128}));
    EXPECT_THROW((void)to_intensity8(make_tile(2, 1, {5, 5})), ContractError);
}

TEST(Preprocess, ChannelsAreIdenticalBeforeNormalization) {
    PreprocessOptions opts;
    opts.size = 16;
    opts.mean = {0.0, 0.0, 0.0};
    opts.std = {1.0, 1.0, 1.0};
    const Image img = preprocess_tile(textured_tile(20, 4), opts);
    ASSERT_EQ(img.pixels.size(), 3u * 16u * 16u);
    for (std::size_t i = 0; i < 256; ++i) {
        EXPECT_EQ(img.pixels[i], img.pixels[256 + i]);
        EXPECT_EQ(img.pixels[i], img.pixels[512 + i]);
        EXPECT_GE(img.pixels[i], 0.0f);
        EXPECT_LE(img.pixels[i], 1.0f);
    }
}

TEST(Preprocess, ResizeOfConstantIsConstant) {
    const RasterTile r = resize_bilinear(make_tile(3, 3, std::vector<double>(9, 7.0)), 8);
    EXPECT_EQ(r.width, 8u);
    for (double v : r.values) EXPECT_DOUBLE_EQ(v, 7.0);
}

TEST(Preprocess, MedianRemovesImpulse) {
    std::vector<double> v(25, 10.0);
    v[12] = 1000.0;
    const RasterTile m = median_filter3(make_tile(5, 5, v));
    EXPECT_EQ(m.values[12], 10.0);
}

DatasetManifest synthetic_manifest(std::size_t regions, std::size_t per_region) {
    DatasetManifest m;
    for (std::size_t r = 0; r < regions; ++r) {
        for (std::size_t t = 0; t < per_region; ++t) {
            m.samples.push_back({"r" + std::to_string(r) + "/t" + std::to_string(t),
                                 "r" + std::to_string(r), static_cast<int>(r % 2)});
        }
    }
    return m;
}

TEST(Split, TileGranularityProportions) {
    DatasetManifest m = synthetic_manifest(10, 10);
    split_dataset(m, {0.70, 0.15, 0.15}, 3, SplitGranularity::Tile);
    EXPECT_EQ(m.in_split(Split::Train).size(), 70u);
    EXPECT_EQ(m.in_split(Split::Val).size(), 15u);
    EXPECT_EQ(m.in_split(Split::Test).size(), 15u);
}

TEST(Split, SameSeedSameAssignment) {
    DatasetManifest a = synthetic_manifest(10, 10);
    DatasetManifest b = synthetic_manifest(10, 10);
    split_dataset(a, {0.70, 0.15, 0.15}, 9, SplitGranularity::Tile);
    split_dataset(b, {0.70, 0.15, 0.15}, 9, SplitGranularity::Tile);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        EXPECT_EQ(a.samples[i].split, b.samples[i].split);
    }
}

TEST(Split, RegionsNeverStraddleSplits) {
    DatasetManifest m = synthetic_manifest(20, 5);
    split_dataset(m, {0.70, 0.15, 0.15}, 4, SplitGranularity::Region);
    std::map<std::string, std::set<Split>> seen;
    for (const auto &s : m.samples) seen[s.region_id].insert(s.split);
    for (const auto &[region, splits] : seen) EXPECT_EQ(splits.size(), 1u) << region;
    EXPECT_EQ(m.in_split(Split::Train).size(), 70u);
}

TEST(Split, RatiosMustSumToOne) {
    DatasetManifest m = synthetic_manifest(2, 2);
    EXPECT_THROW(split_dataset(m, {0.5, 0.2, 0.2}, 0, SplitGranularity::Tile), ConfigError);
}

TEST(Sampler, BalancedInputIsUniform) {
    const WeightedSampler s({0, 1, 0, 1}, 1);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(s.probability(i), 0.25);
}

TEST(Sampler, ImbalancedInputIsReweighted) {
    std::vector<int> labels(100, 0);
    std::fill(labels.begin(), labels.begin() + 10, 1);
    const WeightedSampler s(labels, 1);
    EXPECT_NEAR(s.probability(0), 0.05, 1e-15);
    EXPECT_NEAR(s.probability(50), 0.5 / 90.0, 1e-15);
}

TEST(Sampler, FixedSeedFixedStream) {
    WeightedSampler a({0, 1, 1, 0, 0}, 77);
    WeightedSampler b({0, 1, 1, 0, 0}, 77);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    const std::string saved = a.state();
    const std::size_t next = a.next();
    b.set_state(saved);
    EXPECT_EQ(b.next(), next);
}

TEST(Sampler, SingleClassIsError) {
    EXPECT_THROW(WeightedSampler({1, 1, 1}, 0), ConfigError);
}

Image counting_image(std::size_t size) {
    Image img{3, size, std::vector<float>(3 * size * size)};
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<float>(i);
    return img;
}

TEST(Augment, ZeroProbabilitiesAreIdentity) {
    const Image img = counting_image(6);
    Rng rng(1);
    const Image out = augment(img, rng, AugmentOptions{0.0, 0.0, false});
    EXPECT_EQ(out.pixels, img.pixels);
}

TEST(Augment, FlipsAreInvolutions) {
    const Image img = counting_image(5);
    EXPECT_EQ(hflip(hflip(img)).pixels, img.pixels);
    EXPECT_EQ(vflip(vflip(img)).pixels, img.pixels);
    EXPECT_EQ(rot90(img, 4).pixels, img.pixels);
    EXPECT_EQ(hflip(img).pixels[0], img.pixels[4]);
}

TEST(Augment, PreservesPixelMultiset) {
    const Image img = counting_image(7);
    Rng rng(3);
    for (int i = 0; i < 10; ++i) {
        Image out = augment(img, rng);
        std::sort(out.pixels.begin(), out.pixels.end());
        EXPECT_EQ(out.pixels, img.pixels);
    }
}

TEST(Synth, LayoutLabelsAndDeterminism) {
    TempDir a("synth_a");
    TempDir b("synth_b");
    const SynthOptions opts{4, 3, 32, 5};
    synth_generate(opts, a.path());
    synth_generate(opts, b.path());
    const DatasetManifest m = scan_dataset(a.path());
    ASSERT_EQ(m.samples.size(), 12u);
    const auto counts = m.class_counts(Split::Unassigned);
    EXPECT_EQ(counts[0], 6u);
    EXPECT_EQ(counts[1], 6u);
    for (const auto &s : m.samples) {
        const auto rel = std::filesystem::relative(s.path, a.path());
        EXPECT_EQ(qviton::testing::read_bytes(a.path() / rel),
                  qviton::testing::read_bytes(b.path() / rel));
    }
    EXPECT_EQ(qviton::testing::read_bytes(a / "metadata.json"),
              qviton::testing::read_bytes(b / "metadata.json"));
}

TEST(Synth, FloodedTilesAreDarker) {
    Rng rng(8);
    double flooded = 0.0, dry = 0.0;
    for (int i = 0; i < 20; ++i) {
        const RasterTile f = synth_tile(32, true, rng);
        const RasterTile d = synth_tile(32, false, rng);
        for (double v : f.values) flooded += v;
        for (double v : d.values) dry += v;
    }
    EXPECT_LT(flooded, dry);
}

TEST(Raster, PgmAndRf32RoundTrip) {
    TempDir dir("raster");
    const RasterTile t = make_tile(3, 2, {0, 1, 2, 300, 65535, 7});
    write_pgm(dir / "t.pgm", t);
    EXPECT_EQ(read_raster(dir / "t.pgm").values, t.values);
    const RasterTile g = make_tile(2, 2, {0.5, -1.25, 3.0, 1e-3});
    write_rf32(dir / "t.rf32", {g, t.width == 2 ? t : make_tile(2, 2, {1, 2, 3, 4})});
    const RasterTile back = read_rf32(dir / "t.rf32", 0);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_FLOAT_EQ(back.values[i], g.values[i]);
    EXPECT_EQ(read_rf32(dir / "t.rf32", 1).values, (std::vector<double>{1, 2, 3, 4}));
    EXPECT_THROW((void)read_rf32(dir / "t.rf32", 2), IoError);
    EXPECT_THROW((void)read_raster(dir / "missing.pgm"), IoError);
}

} // namespace
} // namespace qviton::data
