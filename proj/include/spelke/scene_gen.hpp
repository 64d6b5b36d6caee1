#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spelke/common.hpp"
#include "spelke/fields.hpp"
#include "spelke/rng.hpp"
#include "spelke/scene.hpp"

namespace spelke {

// Parameters for seeded scene generation. Non-stacked groups keep a
// Chebyshev gap of at least `placement_margin` from each other; stacked
// groups touch their supporter (a support relation implies contact), with
// the stacked rectangle's columns contained in the supporter's so the
// union stays 4-connected.
struct SceneGenConfig {
    GridShape grid{32, 32};
    std::uint32_t group_count_min = 3;
    std::uint32_t group_count_max = 6;
    std::uint32_t group_size_min = 4;
    std::uint32_t group_size_max = 6;
    double mobility_min = 0.6;
    double mobility_max = 0.9;
    double support_stack_prob = 0.0;
    double articulation_prob = 0.0;
    double noise_eps = 0.0;
    std::uint32_t placement_margin = 5;
    std::uint32_t max_attempts = 10000;

    void validate() const {
        if (group_count_min > group_count_max || group_size_min > group_size_max)
            throw validation_error("scene generation ranges are inverted");
        if (group_size_min < 1) throw validation_error("group size must be >= 1");
        if (!(mobility_min >= 0.0 && mobility_max <= 1.0 && mobility_min <= mobility_max))
            throw validation_error("mobility range must lie in [0, 1]");
        if (!(noise_eps >= 0.0 && noise_eps < 1.0))
            throw validation_error("noise_eps must lie in [0, 1)");
        if (!(support_stack_prob >= 0.0 && support_stack_prob <= 1.0) ||
            !(articulation_prob >= 0.0 && articulation_prob <= 1.0))
            throw validation_error("probabilities must lie in [0, 1]");
    }
};

struct GeneratedScene {
    SyntheticScene scene;
    std::vector<SegmentMask> gt_masks;          // one per group
    std::vector<SegmentMask> gt_closure_masks;  // per group, with supported descendants
};

namespace detail {

struct Rect {
    std::uint32_t row = 0, col = 0, height = 0, width = 0;

    bool intersects_with_gap(const Rect& other, std::uint32_t gap) const {
        const std::int64_t r0 = std::int64_t(row) - gap;
        const std::int64_t c0 = std::int64_t(col) - gap;
        const std::int64_t r1 = std::int64_t(row) + height + gap;
        const std::int64_t c1 = std::int64_t(col) + width + gap;
        return !(std::int64_t(other.row) >= r1 || std::int64_t(other.row) + other.height <= r0 ||
                 std::int64_t(other.col) >= c1 || std::int64_t(other.col) + other.width <= c0);
    }
};

inline std::vector<Location> rect_cells(const GridShape& grid, const Rect& rect) {
    std::vector<Location> cells;
    cells.reserve(static_cast<std::size_t>(rect.height) * rect.width);
    for (std::uint32_t r = rect.row; r < rect.row + rect.height; ++r)
        for (std::uint32_t c = rect.col; c < rect.col + rect.width; ++c)
            cells.push_back(grid.at(r, c));
    return cells;
}

}  // namespace detail

namespace detail {

struct Placement {
    Rect rect;
    std::int32_t supporter = -1;  // -1: free-standing
};

inline bool rect_fits(const Rect& rect, const std::vector<Rect>& rects,
                      std::int32_t supporter, std::uint32_t margin) {
    for (std::size_t other = 0; other < rects.size(); ++other) {
        // The supporter is allowed (required) to touch; everyone else
        // keeps the margin.
        const std::uint32_t gap =
            static_cast<std::int32_t>(other) == supporter ? 0 : margin;
        if (rects[other].intersects_with_gap(rect, gap)) return false;
    }
    return true;
}

// Random placement attempts, then a deterministic first-fit scan at the
// minimum size, so feasible configurations always place.
inline std::optional<Placement> place_group(const SceneGenConfig& config, bool try_stack,
                                            const std::vector<Rect>& rects, Rng& rng) {
    const GridShape grid = config.grid;
    const std::uint32_t span = config.group_size_max - config.group_size_min + 1;
    for (std::uint32_t attempt = 0; attempt < config.max_attempts; ++attempt) {
        Placement p;
        p.rect.height =
            config.group_size_min + static_cast<std::uint32_t>(rng.next_below(span));
        p.rect.width =
            config.group_size_min + static_cast<std::uint32_t>(rng.next_below(span));
        if (try_stack && !rects.empty()) {
            p.supporter = static_cast<std::int32_t>(rng.next_below(rects.size()));
            const Rect& base = rects[static_cast<std::uint32_t>(p.supporter)];
            if (p.rect.width > base.width) p.rect.width = base.width;
            if (base.row < p.rect.height) continue;  // no room above
            p.rect.row = base.row - p.rect.height;
            p.rect.col = base.col + static_cast<std::uint32_t>(
                                        rng.next_below(base.width - p.rect.width + 1));
        } else {
            if (grid.height < p.rect.height || grid.width < p.rect.width) continue;
            p.rect.row =
                static_cast<std::uint32_t>(rng.next_below(grid.height - p.rect.height + 1));
            p.rect.col =
                static_cast<std::uint32_t>(rng.next_below(grid.width - p.rect.width + 1));
        }
        if (rect_fits(p.rect, rects, p.supporter, config.placement_margin)) return p;
    }

    const std::uint32_t h = config.group_size_min, w = config.group_size_min;
    if (try_stack) {
        for (std::uint32_t s = 0; s < rects.size(); ++s) {
            const Rect& base = rects[s];
            if (base.row < h || base.width < w) continue;
            for (std::uint32_t col = base.col; col + w <= base.col + base.width; ++col) {
                const Rect rect{base.row - h, col, h, w};
                if (rect_fits(rect, rects, static_cast<std::int32_t>(s),
                              config.placement_margin))
                    return Placement{rect, static_cast<std::int32_t>(s)};
            }
        }
        // No supporter has room; fall through to a free-standing scan.
    }
    if (grid.height >= h && grid.width >= w) {
        for (std::uint32_t row = 0; row + h <= grid.height; ++row) {
            for (std::uint32_t col = 0; col + w <= grid.width; ++col) {
                const Rect rect{row, col, h, w};
                if (rect_fits(rect, rects, -1, config.placement_margin))
                    return Placement{rect, -1};
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

inline GeneratedScene generate_scene(const SceneGenConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const GridShape grid = config.grid;

    const std::uint32_t count =
        config.group_count_min +
        static_cast<std::uint32_t>(
            rng.next_below(config.group_count_max - config.group_count_min + 1));

    constexpr std::uint32_t kMaxRestarts = 40;
    for (std::uint32_t restart = 0; restart < kMaxRestarts; ++restart) {
        SyntheticScene scene;
        scene.grid = grid;
        scene.noise_eps = config.noise_eps;
        std::vector<detail::Rect> rects;
        bool failed = false;

        for (std::uint32_t g = 0; g < count && !failed; ++g) {
            const bool try_stack = g > 0 && rng.next_double() < config.support_stack_prob;
            const auto placement = detail::place_group(config, try_stack, rects, rng);
            if (!placement) {
                failed = true;
                break;
            }
            SceneGroup group;
            group.cells = detail::rect_cells(grid, placement->rect);
            group.mobility = config.mobility_min +
                             rng.next_double() * (config.mobility_max - config.mobility_min);
            if (rng.next_double() < config.articulation_prob && placement->rect.width >= 2) {
                // Two branches: the whole rectangle, or its left half.
                detail::Rect part = placement->rect;
                part.width = placement->rect.width / 2;
                ArticulationMode whole{0.5, group.cells};
                ArticulationMode half{0.5, detail::rect_cells(grid, part)};
                group.articulations = {whole, half};
            }
            scene.groups.push_back(std::move(group));
            rects.push_back(placement->rect);
            if (placement->supporter >= 0)
                scene.support_edges.push_back(
                    {static_cast<std::uint32_t>(placement->supporter), g});
        }
        if (failed) continue;

        scene.validate();
        GeneratedScene out;
        out.scene = scene;
        for (std::uint32_t g = 0; g < scene.group_count(); ++g) {
            out.gt_masks.push_back(scene.group_mask(g));
            out.gt_closure_masks.push_back(scene.closure_mask(g));
        }
        return out;
    }
    throw validation_error(
        "scene generation failed: groups cannot fit (grid too small for the requested "
        "count/size/margin)");
}

}  // namespace spelke
