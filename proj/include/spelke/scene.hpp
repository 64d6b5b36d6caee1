#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spelke/common.hpp"
#include "spelke/fields.hpp"
#include "spelke/grid.hpp"

namespace spelke {

// One branch of a multimodal poke response: with `probability`, only
// `cells` (a subset of the owning group) co-move with the poke.
struct ArticulationMode {
    double probability = 1.0;
    std::vector<Location> cells;  // sorted, subset of the group
};

struct SceneGroup {
    std::vector<Location> cells;  // sorted, disjoint from other groups
    double mobility = 0.0;        // prior probability of spontaneous motion
    std::vector<ArticulationMode> articulations;  // empty => rigid
};

// A rigid-scene world with support relations and articulation modes. The
// background is the complement of all groups and never moves under a
// static camera. Poking a group moves the group (or an articulation
// subset of it) together with every group it transitively supports;
// poking a supported group moves that group alone.
struct SyntheticScene {
    GridShape grid;
    std::vector<SceneGroup> groups;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> support_edges;  // (supporter, supported)
    double noise_eps = 0.0;  // probability mass spread uniformly over all flow tokens

    std::uint32_t group_count() const { return static_cast<std::uint32_t>(groups.size()); }

    // -1 for background, else group index. Row-major per location.
    std::vector<std::int32_t> owner_map() const {
        std::vector<std::int32_t> owner(grid.locations(), -1);
        for (std::uint32_t g = 0; g < groups.size(); ++g)
            for (Location c : groups[g].cells) owner[c] = static_cast<std::int32_t>(g);
        return owner;
    }

    // Groups transitively supported by g (g excluded).
    std::vector<std::uint32_t> descendants(std::uint32_t g) const {
        std::vector<std::uint8_t> seen(groups.size(), 0);
        std::vector<std::uint32_t> stack{g}, out;
        seen[g] = 1;
        while (!stack.empty()) {
            const std::uint32_t cur = stack.back();
            stack.pop_back();
            for (const auto& [a, b] : support_edges) {
                if (a == cur && !seen[b]) {
                    seen[b] = 1;
                    stack.push_back(b);
                    out.push_back(b);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    // Groups that transitively support g (g excluded).
    std::vector<std::uint32_t> ancestors(std::uint32_t g) const {
        std::vector<std::uint32_t> out;
        for (std::uint32_t a = 0; a < groups.size(); ++a) {
            if (a == g) continue;
            const auto desc = descendants(a);
            if (std::binary_search(desc.begin(), desc.end(), g)) out.push_back(a);
        }
        return out;
    }

    SegmentMask group_mask(std::uint32_t g) const {
        SegmentMask m = make_empty_mask(grid);
        for (Location c : groups[g].cells) m.inside[c] = 1;
        m.cluster_id = g;
        return m;
    }

    // g together with everything it supports.
    SegmentMask closure_mask(std::uint32_t g) const {
        SegmentMask m = group_mask(g);
        for (std::uint32_t d : descendants(g))
            for (Location c : groups[d].cells) m.inside[c] = 1;
        return m;
    }

    void validate() const {
        if (!(noise_eps >= 0.0 && noise_eps < 1.0))
            throw validation_error("noise_eps must lie in [0, 1)");
        std::vector<std::uint8_t> used(grid.locations(), 0);
        for (std::uint32_t g = 0; g < groups.size(); ++g) {
            const auto& group = groups[g];
            if (group.cells.empty())
                throw validation_error("group " + std::to_string(g) + " is empty");
            if (!std::is_sorted(group.cells.begin(), group.cells.end()))
                throw validation_error("group cells must be sorted");
            for (Location c : group.cells) {
                if (!grid.contains(c)) throw validation_error("group cell out of grid");
                if (used[c]) throw validation_error("groups overlap at location " + std::to_string(c));
                used[c] = 1;
            }
            if (!(group.mobility >= 0.0 && group.mobility <= 1.0))
                throw validation_error("mobility must lie in [0, 1]");
            if (!group.articulations.empty()) {
                double total = 0.0;
                for (const auto& mode : group.articulations) {
                    if (!(mode.probability >= 0.0))
                        throw validation_error("articulation probability negative");
                    total += mode.probability;
                    for (Location c : mode.cells)
                        if (!std::binary_search(group.cells.begin(), group.cells.end(), c))
                            throw validation_error("articulation cell outside its group");
                }
                if (std::abs(total - 1.0) > 1e-9)
                    throw validation_error("articulation probabilities must sum to 1");
            }
        }
        for (const auto& [a, b] : support_edges)
            if (a >= groups.size() || b >= groups.size() || a == b)
                throw validation_error("support edge references invalid group");
        // Every cycle contains an edge (a, b) with a reachable from b.
        for (const auto& [a, b] : support_edges) {
            const auto desc = descendants(b);
            if (std::binary_search(desc.begin(), desc.end(), a))
                throw validation_error("support relation contains a cycle");
        }
    }
};

// Run-length encoding of a sorted location list: list of (start, length)
// runs of consecutive row-major indices. Used by the scene file format.
inline std::vector<std::pair<Location, std::uint32_t>> encode_rle(
    const std::vector<Location>& cells) {
    std::vector<std::pair<Location, std::uint32_t>> runs;
    for (Location c : cells) {
        if (!runs.empty() && runs.back().first + runs.back().second == c)
            ++runs.back().second;
        else
            runs.push_back({c, 1});
    }
    return runs;
}

inline std::vector<Location> decode_rle(
    const std::vector<std::pair<Location, std::uint32_t>>& runs) {
    std::vector<Location> cells;
    for (const auto& [start, len] : runs)
        for (std::uint32_t k = 0; k < len; ++k) cells.push_back(start + k);
    if (!std::is_sorted(cells.begin(), cells.end()))
        throw validation_error("RLE runs must be sorted and non-overlapping");
    return cells;
}

}  // namespace spelke
