#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "spelke/fields.hpp"
#include "spelke/flow.hpp"

namespace spelke {

// Standard optical-flow color wheel (Baker et al. / Middlebury): hue
// encodes direction, saturation encodes magnitude relative to max_norm.
namespace detail {

inline const std::vector<std::array<int, 3>>& flow_color_wheel() {
    static const std::vector<std::array<int, 3>> wheel = [] {
        const int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
        std::vector<std::array<int, 3>> w;
        for (int i = 0; i < RY; ++i) w.push_back({255, 255 * i / RY, 0});
        for (int i = 0; i < YG; ++i) w.push_back({255 - 255 * i / YG, 255, 0});
        for (int i = 0; i < GC; ++i) w.push_back({0, 255, 255 * i / GC});
        for (int i = 0; i < CB; ++i) w.push_back({0, 255 - 255 * i / CB, 255});
        for (int i = 0; i < BM; ++i) w.push_back({255 * i / BM, 0, 255});
        for (int i = 0; i < MR; ++i) w.push_back({255, 0, 255 - 255 * i / MR});
        return w;
    }();
    return wheel;
}

}  // namespace detail

inline std::array<std::uint8_t, 3> flow_color(const FlowVector& v, double max_norm) {
    const auto& wheel = detail::flow_color_wheel();
    const int ncols = static_cast<int>(wheel.size());
    const double rad = max_norm > 0.0 ? v.norm() / max_norm : 0.0;
    const double a = std::atan2(-v.dy, -v.dx) / std::numbers::pi;
    const double fk = (a + 1.0) / 2.0 * (ncols - 1);
    const int k0 = static_cast<int>(fk);
    const int k1 = (k0 + 1) % ncols;
    const double f = fk - k0;
    std::array<std::uint8_t, 3> out{};
    for (int b = 0; b < 3; ++b) {
        const double col0 = wheel[k0][b] / 255.0;
        const double col1 = wheel[k1][b] / 255.0;
        double col = (1.0 - f) * col0 + f * col1;
        if (rad <= 1.0)
            col = 1.0 - rad * (1.0 - col);
        else
            col *= 0.75;
        out[b] = static_cast<std::uint8_t>(std::clamp(col * 255.0 + 0.5, 0.0, 255.0));
    }
    return out;
}

struct FlowRender {
    std::vector<std::uint8_t> rgb;
    double max_norm = 0.0;
};

inline FlowRender render_flow(const GridShape& grid, const std::vector<FlowVector>& vectors) {
    FlowRender render;
    for (const auto& v : vectors) render.max_norm = std::max(render.max_norm, v.norm());
    render.rgb.reserve(static_cast<std::size_t>(grid.locations()) * 3);
    for (const auto& v : vectors) {
        const auto c = flow_color(v, render.max_norm);
        render.rgb.push_back(c[0]);
        render.rgb.push_back(c[1]);
        render.rgb.push_back(c[2]);
    }
    return render;
}

}  // namespace spelke
