#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spelke/common.hpp"
#include "spelke/fields.hpp"

namespace spelke {

// Binary PGM (P5), maxval 255. Masks use 0 = outside, 255 = inside.

inline void write_pgm(const std::filesystem::path& path, const GridShape& grid,
                      const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != grid.locations()) throw io_error("PGM pixel count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << "P5\n" << grid.width << " " << grid.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw io_error("short write to " + path.string());
}

inline void write_mask_pgm(const std::filesystem::path& path, const SegmentMask& mask) {
    std::vector<std::uint8_t> pixels(mask.grid.locations());
    for (Location i = 0; i < mask.grid.locations(); ++i)
        pixels[i] = mask.contains(i) ? 255 : 0;
    write_pgm(path, mask.grid, pixels);
}

namespace detail {

inline int next_pnm_token(std::istream& in) {
    // Skips whitespace and '#' comments, returns the next integer.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF) throw io_error("truncated PNM header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

}  // namespace detail

inline std::pair<GridShape, std::vector<std::uint8_t>> read_pgm(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw io_error(path.string() + " is not a binary PGM");
    const int width = detail::next_pnm_token(in);
    const int height = detail::next_pnm_token(in);
    const int maxval = detail::next_pnm_token(in);
    if (width < 1 || height < 1 || maxval != 255)
        throw io_error("unsupported PGM geometry in " + path.string());
    GridShape grid(static_cast<std::uint32_t>(height), static_cast<std::uint32_t>(width));
    std::vector<std::uint8_t> pixels(grid.locations());
    in.read(reinterpret_cast<char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != pixels.size())
        throw io_error("PGM payload truncated in " + path.string());
    return {grid, std::move(pixels)};
}

inline SegmentMask read_mask_pgm(const std::filesystem::path& path) {
    auto [grid, pixels] = read_pgm(path);
    SegmentMask mask = make_empty_mask(grid);
    for (Location i = 0; i < grid.locations(); ++i) mask.inside[i] = pixels[i] >= 128 ? 1 : 0;
    return mask;
}

// Linear grayscale rendering of a scalar map; the caller records the
// min/max used in a sidecar so values can be recovered.
struct GrayscaleRender {
    std::vector<std::uint8_t> pixels;
    double min_value = 0.0;
    double max_value = 0.0;
};

inline GrayscaleRender render_grayscale(const std::vector<double>& values) {
    GrayscaleRender render;
    if (values.empty()) return render;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    render.min_value = *lo;
    render.max_value = *hi;
    render.pixels.resize(values.size());
    const double span = *hi - *lo;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double t = span > 0.0 ? (values[i] - *lo) / span : 0.0;
        render.pixels[i] = static_cast<std::uint8_t>(std::clamp(t * 255.0 + 0.5, 0.0, 255.0));
    }
    return render;
}

// Binary PPM (P6) for color renderings.
inline void write_ppm(const std::filesystem::path& path, const GridShape& grid,
                      const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(grid.locations()) * 3)
        throw io_error("PPM pixel count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << "P6\n" << grid.width << " " << grid.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()),
              static_cast<std::streamsize>(rgb.size()));
    if (!out) throw io_error("short write to " + path.string());
}

}  // namespace spelke
