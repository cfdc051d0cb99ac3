// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/raster_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "qviton/error.hpp"

namespace qviton::data {

namespace {

std::uint32_t read_le32(const unsigned char *p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_le32(std::ofstream &out, std::uint32_t v) {
    const std::array<char, 4> bytes{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                    static_cast<char>((v >> 16) & 0xff),
                                    static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes.data(), 4);
}

std::string describe(const std::filesystem::path &path) { return "'" + path.string() + "'"; }

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream &in) {
    std::string token;
    char c = 0;
    while (in.get(c)) {
        if (c == '#') {
            std::string discard;
            std::getline(in, discard);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!token.empty()) {
                break;
            }
            continue;
        }
        token.push_back(c);
    }
    return token;
}

std::size_t parse_extent(const std::string &token, const std::filesystem::path &path) {
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(token, &used);
        if (used != token.size()) {
            throw IoError("");
        }
        return v;
    } catch (const std::exception &) {
        throw IoError("malformed PGM header in " + describe(path));
    }
}

} // namespace

bool is_raster_file(const std::filesystem::path &path) {
    const auto ext = path.extension().string();
    return ext == ".pgm" || ext == ".rf32";
}

RasterTile read_raster(const std::filesystem::path &path, std::size_t band) {
    const auto ext = path.extension().string();
    if (ext == ".pgm") {
        if (band != 0) {
            throw IoError("PGM file " + describe(path) + " has a single band");
        }
        return read_pgm(path);
    }
    if (ext == ".rf32") {
        return read_rf32(path, band);
    }
    throw IoError("unsupported raster format " + describe(path));
}

RasterTile read_pgm(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + describe(path));
    }
    if (pgm_token(in) != "P5") {
        throw IoError(describe(path) + " is not a binary PGM");
    }
    RasterTile tile;
    tile.width = parse_extent(pgm_token(in), path);
    tile.height = parse_extent(pgm_token(in), path);
    const std::size_t maxval = parse_extent(pgm_token(in), path);
    if (tile.width == 0 || tile.height == 0 || maxval == 0 || maxval > 65535) {
        throw IoError("invalid PGM extents in " + describe(path));
    }
    const std::size_t n = tile.width * tile.height;
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes_per);
    in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw IoError("truncated PGM payload in " + describe(path));
    }
    tile.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tile.values[i] = bytes_per == 2 ? static_cast<double>((raw[2 * i] << 8) | raw[2 * i + 1])
                                        : static_cast<double>(raw[i]);
    }
    return tile;
}

void write_pgm(const std::filesystem::path &path, const RasterTile &tile, std::uint16_t maxval) {
    if (tile.values.size() != tile.width * tile.height || tile.values.empty() || maxval == 0) {
        throw IoError("write_pgm: invalid tile for " + describe(path));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + describe(path));
    }
    out << "P5\n" << tile.width << ' ' << tile.height << '\n' << maxval << '\n';
    std::vector<unsigned char> raw;
    raw.reserve(tile.values.size() * 2);
    for (double v : tile.values) {
        const auto s = static_cast<std::uint16_t>(
            std::clamp(std::nearbyint(v), 0.0, static_cast<double>(maxval)));
        if (maxval > 255) {
            raw.push_back(static_cast<unsigned char>(s >> 8));
        }
        raw.push_back(static_cast<unsigned char>(s & 0xff));
    }
    out.write(reinterpret_cast<const char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) {
        throw IoError("write failed for " + describe(path));
    }
}

RasterTile read_rf32(const std::filesystem::path &path, std::size_t band) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + describe(path));
    }
    std::array<unsigned char, 16> header{};
    in.read(reinterpret_cast<char *>(header.data()), 16);
    if (in.gcount() != 16 || std::memcmp(header.data(), "RF32", 4) != 0) {
        throw IoError(describe(path) + " is not an rf32 raster");
    }
    RasterTile tile;
    tile.width = read_le32(header.data() + 4);
    tile.height = read_le32(header.data() + 8);
    const std::size_t bands = read_le32(header.data() + 12);
    if (tile.width == 0 || tile.height == 0 || bands == 0) {
        throw IoError("invalid rf32 extents in " + describe(path));
    }
    if (band >= bands) {
        throw IoError("band " + std::to_string(band) + " requested from " + describe(path) +
                      " with " + std::to_string(bands) + " band(s)");
    }
    const std::size_t n = tile.width * tile.height;
    in.seekg(static_cast<std::streamoff>(16 + band * n * 4));
    std::vector<unsigned char> raw(n * 4);
    in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw IoError("truncated rf32 payload in " + describe(path));
    }
    tile.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tile.values[i] = std::bit_cast<float>(read_le32(raw.data() + 4 * i));
    }
    return tile;
}

void write_rf32(const std::filesystem::path &path, const std::vector<RasterTile> &bands) {
    if (bands.empty()) {
        throw IoError("write_rf32: no bands for " + describe(path));
    }
    for (const auto &b : bands) {
        if (b.width != bands[0].width || b.height != bands[0].height ||
            b.values.size() != b.width * b.height) {
            throw IoError("write_rf32: inconsistent band extents for " + describe(path));
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + describe(path));
    }
    out.write("RF32", 4);
    put_le32(out, static_cast<std::uint32_t>(bands[0].width));
    put_le32(out, static_cast<std::uint32_t>(bands[0].height));
    put_le32(out, static_cast<std::uint32_t>(bands.size()));
    for (const auto &b : bands) {
        for (double v : b.values) {
            put_le32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        }
    }
    if (!out) {
        throw IoError("write failed for " + describe(path));
    }
}

} // namespace qviton::data
