#pragma once

#include <cstdint>
#include <vector>

#include "spelke/codebook.hpp"
#include "spelke/common.hpp"
#include "spelke/flow.hpp"
#include "spelke/grid.hpp"

namespace spelke {

enum class CameraPose : std::uint8_t {
    static_camera,  // the zero-pose conditioning token; required for probing
    unspecified,
};

// One (location, flow token) conditioning pair.
struct DecodedPair {
    Location location = 0;
    Token token = 0;
    bool operator==(const DecodedPair&) const = default;
};

// A virtual poke: an intervention pair plus the continuous direction it
// was quantized from.
struct Poke {
    Location location = 0;
    FlowVector direction;
    Token token = 0;
};

inline Poke make_poke(Location loc, const FlowVector& direction, const FlowCodebook& cb) {
    Poke p;
    p.location = loc;
    p.token = quantize_flow(direction, cb);
    p.direction = token_center(p.token, cb);
    return p;
}

// The conditioning sequence for a model query: camera pose, the virtual
// pokes (interventions that select what is acted on), and any flow tokens
// already decoded in the current rollout (observations the posterior
// conditions on). Locations must be unique across pokes and decoded pairs.
struct ConditioningContext {
    CameraPose camera = CameraPose::static_camera;
    std::vector<DecodedPair> pokes;
    std::vector<DecodedPair> decoded;

    bool operator==(const ConditioningContext&) const = default;

    void validate(const GridShape& grid) const {
        std::vector<std::uint8_t> used(grid.locations(), 0);
        const auto check = [&](const DecodedPair& p) {
            if (!grid.contains(p.location))
                throw validation_error("context location out of grid");
            if (used[p.location]) throw validation_error("duplicate context location");
            used[p.location] = 1;
        };
        for (const auto& p : pokes) check(p);
        for (const auto& p : decoded) check(p);
    }
};

inline ConditioningContext poke_context(const Poke& poke) {
    ConditioningContext ctx;
    ctx.pokes.push_back({poke.location, poke.token});
    return ctx;
}

}  // namespace spelke
