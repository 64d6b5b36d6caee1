#pragma once

#include <cstdint>

#include "spelke/common.hpp"

namespace spelke {

// Patch grid. Locations are indexed row-major: i = row * width + col.
struct GridShape {
    std::uint32_t height = 0;
    std::uint32_t width = 0;

    GridShape() = default;
    GridShape(std::uint32_t h, std::uint32_t w) : height(h), width(w) {
        if (h < 1 || w < 1) throw validation_error("grid dimensions must be >= 1");
    }

    std::uint32_t locations() const { return height * width; }

    std::uint32_t row_of(Location i) const { return i / width; }
    std::uint32_t col_of(Location i) const { return i % width; }
    Location at(std::uint32_t row, std::uint32_t col) const { return row * width + col; }

    bool contains(Location i) const { return i < locations(); }

    bool operator==(const GridShape&) const = default;
};

}  // namespace spelke
