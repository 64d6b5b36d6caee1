#pragma once

#include <cstdint>

#include "spelke/common.hpp"
#include "spelke/grid.hpp"

namespace spelke {

// Unified vocabulary layout. Four contiguous, disjoint id ranges:
//
//   rgb pointers   [0, l)
//   rgb content    [l, l + |X|)
//   flow pointers  [l + |X|, 2l + |X|)
//   flow content   [2l + |X|, 2l + |X| + |F|)
//
// Only the flow-content range carries semantics in this engine; the rgb
// ranges are kept so token ids stay arithmetic-compatible with dumps
// produced by external backends (|X| may be 0 for synthetic-only runs).
struct VocabularyLayout {
    std::uint32_t locations = 0;          // l
    std::uint32_t rgb_content_size = 0;   // |X|
    std::uint32_t flow_content_size = 0;  // |F|

    VocabularyLayout() = default;
    VocabularyLayout(std::uint32_t l, std::uint32_t rgb_size, std::uint32_t flow_size)
        : locations(l), rgb_content_size(rgb_size), flow_content_size(flow_size) {
        if (l < 1) throw validation_error("vocabulary needs at least one location");
        if (flow_size < 1) throw validation_error("flow content range must be non-empty");
    }

    Token rgb_pointer_begin() const { return 0; }
    Token rgb_content_begin() const { return locations; }
    Token flow_pointer_begin() const { return locations + rgb_content_size; }
    Token flow_content_begin() const { return 2 * locations + rgb_content_size; }
    Token total_size() const { return flow_content_begin() + flow_content_size; }

    bool is_flow_content(Token t) const {
        return t >= flow_content_begin() && t < total_size();
    }
    bool is_flow_pointer(Token t) const {
        return t >= flow_pointer_begin() && t < flow_content_begin();
    }

    Token flow_pointer_for(Location i) const { return flow_pointer_begin() + i; }

    // Offset of a flow-content token into [0, |F|).
    std::uint32_t flow_offset(Token t) const {
        if (!is_flow_content(t)) throw validation_error("token outside flow-content range");
        return t - flow_content_begin();
    }

    bool operator==(const VocabularyLayout&) const = default;
};

inline VocabularyLayout make_layout(const GridShape& grid, std::uint32_t rgb_content_size,
                                    std::uint32_t flow_content_size) {
    return VocabularyLayout(grid.locations(), rgb_content_size, flow_content_size);
}

}  // namespace spelke
