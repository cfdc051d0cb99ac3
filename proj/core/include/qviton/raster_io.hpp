// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Single-band raster readers and writers.
 *
 * Two on-disk formats are supported:
 *  - binary portable graymap (P5), 8- or 16-bit, big-endian samples;
 *  - rf32: 16-byte little-endian header {char[4] "RF32", u32 width,
 *    u32 height, u32 bands} followed by bands * height * width float32
 *    samples, band-major then row-major.
 *
 * Other formats (GeoTIFF and friends) plug in by converting to a
 * RasterTile and calling the same downstream pipeline; read_raster()
 * dispatches on file extension and is the single place to extend.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace qviton::data {

struct RasterTile {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values; // row-major, width * height

    [[nodiscard]] double at(std::size_t row, std::size_t col) const {
        return values[row * width + col];
    }
};

/// True for extensions the reader understands (.pgm, .rf32).
bool is_raster_file(const std::filesystem::path &path);

/// Reads band `band` of a supported raster; IoError on any failure.
RasterTile read_raster(const std::filesystem::path &path, std::size_t band = 0);

RasterTile read_pgm(const std::filesystem::path &path);
/// Writes values rounded and clamped to [0, maxval]; 16-bit when maxval > 255.
void write_pgm(const std::filesystem::path &path, const RasterTile &tile,
               std::uint16_t maxval = 65535);

RasterTile read_rf32(const std::filesystem::path &path, std::size_t band = 0);
void write_rf32(const std::filesystem::path &path, const std::vector<RasterTile> &bands);

} // namespace qviton::data
