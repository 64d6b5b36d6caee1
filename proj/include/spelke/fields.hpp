#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "spelke/common.hpp"
#include "spelke/epigraphy.hpp"
#include "spelke/flow.hpp"
#include "spelke/grid.hpp"

namespace spelke {

// Per-location categorical distribution over the flow-content vocabulary,
// indexed by token offset. Entries are >= 0 and sum to 1 within 1e-9.
struct CategoricalFlowDistribution {
    std::vector<double> probabilities;

    void validate(double tolerance = 1e-9) const {
        double sum = 0.0;
        for (double p : probabilities) {
            if (!(p >= 0.0)) throw model_contract_error("distribution entry negative or NaN");
            sum += p;
        }
        if (std::abs(sum - 1.0) > tolerance)
            throw model_contract_error("distribution sums to " + std::to_string(sum));
    }

    // Inverse-CDF sample; returns a token offset. u in [0, 1).
    std::uint32_t sample_offset(double u) const {
        double cum = 0.0;
        for (std::uint32_t j = 0; j < probabilities.size(); ++j) {
            cum += probabilities[j];
            if (u < cum) return j;
        }
        return static_cast<std::uint32_t>(probabilities.size() - 1);
    }
};

// Full grid of distributions, [location][token offset].
struct DistributionField {
    GridShape grid;
    std::vector<CategoricalFlowDistribution> distributions;
};

struct AffordanceMap {
    GridShape grid;
    std::vector<double> values;  // per-location probability in [0, 1]
};

// A completed flow field: one vector (and optionally the decoded token)
// per location.
struct FlowField {
    GridShape grid;
    std::vector<FlowVector> vectors;
    std::vector<Token> tokens;  // may be empty when vectors came from files

    bool operator==(const FlowField&) const = default;
};

enum class DecodeMode { parallel, sequential };

struct DisplacementMap {
    GridShape grid;
    std::vector<FlowVector> vectors;
    DecodeMode mode = DecodeMode::parallel;
    std::uint32_t rollouts = 0;  // T, >= 1 when mode == sequential
};

struct MotionCorrelationMap {
    GridShape grid;
    std::vector<double> values;  // dot-bar per location
};

struct SegmentMask {
    GridShape grid;
    std::vector<std::uint8_t> inside;  // 0 / 1 per location
    std::optional<Location> prompt;    // provenance: prompt point, if any
    std::optional<std::uint32_t> cluster_id;
    bool degenerate = false;           // set when thresholding found no bimodality

    std::uint32_t area() const {
        std::uint32_t n = 0;
        for (auto v : inside) n += v;
        return n;
    }
    bool empty() const { return area() == 0; }

    bool contains(Location i) const { return inside[i] != 0; }
};

inline SegmentMask make_empty_mask(const GridShape& grid) {
    SegmentMask m;
    m.grid = grid;
    m.inside.assign(grid.locations(), 0);
    return m;
}

// 4-connected component of `seed` within the mask.
inline SegmentMask connected_component(const SegmentMask& mask, Location seed) {
    SegmentMask out = make_empty_mask(mask.grid);
    if (!mask.grid.contains(seed) || !mask.contains(seed)) return out;
    std::vector<std::uint8_t> seen(mask.grid.locations(), 0);
    std::queue<Location> frontier;
    frontier.push(seed);
    seen[seed] = 1;
    while (!frontier.empty()) {
        const Location u = frontier.front();
        frontier.pop();
        out.inside[u] = 1;
        const std::uint32_t r = mask.grid.row_of(u), c = mask.grid.col_of(u);
        const auto visit = [&](std::uint32_t rr, std::uint32_t cc) {
            const Location v = mask.grid.at(rr, cc);
            if (!seen[v] && mask.contains(v)) {
                seen[v] = 1;
                frontier.push(v);
            }
        };
        if (r > 0) visit(r - 1, c);
        if (r + 1 < mask.grid.height) visit(r + 1, c);
        if (c > 0) visit(r, c - 1);
        if (c + 1 < mask.grid.width) visit(r, c + 1);
    }
    return out;
}

}  // namespace spelke
