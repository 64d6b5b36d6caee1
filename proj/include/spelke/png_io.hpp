#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include <zlib.h>

#include "spelke/common.hpp"
#include "spelke/grid.hpp"

namespace spelke {

// Minimal PNG writer (8-bit grayscale or RGB) for the optional --png
// exports. PGM/PPM remain the primary formats.
namespace detail {

inline void png_append_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
    out.push_back(static_cast<unsigned char>(v & 0xFF));
}

inline void png_append_chunk(std::vector<unsigned char>& out, const char type[4],
                             const std::vector<unsigned char>& payload) {
    png_append_u32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc = crc32(0, out.data() + crc_start,
                            static_cast<uInt>(out.size() - crc_start));
    png_append_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

inline void write_png(const std::filesystem::path& path, const GridShape& grid,
                      const std::vector<std::uint8_t>& pixels, std::uint32_t channels) {
    if (channels != 1 && channels != 3) throw io_error("PNG writer supports 1 or 3 channels");
    if (pixels.size() != static_cast<std::size_t>(grid.locations()) * channels)
        throw io_error("PNG pixel count mismatch");

    // Filter byte 0 per scanline.
    std::vector<unsigned char> raw;
    raw.reserve(pixels.size() + grid.height);
    for (std::uint32_t r = 0; r < grid.height; ++r) {
        raw.push_back(0);
        const std::size_t offset = static_cast<std::size_t>(r) * grid.width * channels;
        raw.insert(raw.end(), pixels.begin() + offset,
                   pixels.begin() + offset + static_cast<std::size_t>(grid.width) * channels);
    }
    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(compressed_size);
    if (compress2(compressed.data(), &compressed_size, raw.data(),
                  static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw io_error("PNG deflate failed");
    compressed.resize(compressed_size);

    std::vector<unsigned char> out;
    const unsigned char signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    out.insert(out.end(), signature, signature + 8);

    std::vector<unsigned char> ihdr;
    detail::png_append_u32(ihdr, grid.width);
    detail::png_append_u32(ihdr, grid.height);
    ihdr.push_back(8);                                // bit depth
    ihdr.push_back(channels == 1 ? 0 : 2);            // gray / truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    detail::png_append_chunk(out, "IHDR", ihdr);
    detail::png_append_chunk(out, "IDAT", compressed);
    detail::png_append_chunk(out, "IEND", {});

    std::ofstream file(path, std::ios::binary);
    if (!file) throw io_error("cannot open " + path.string() + " for writing");
    file.write(reinterpret_cast<const char*>(out.data()),
               static_cast<std::streamsize>(out.size()));
    if (!file) throw io_error("short write to " + path.string());
}

}  // namespace spelke
