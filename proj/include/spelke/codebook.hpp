#pragma once

#include <cmath>
#include <cstdint>

#include "spelke/common.hpp"
#include "spelke/flow.hpp"
#include "spelke/vocab.hpp"

namespace spelke {

// Uniform grid codebook over flow vectors. Each axis is clamped to
// [-max_magnitude, max_magnitude] and snapped to one of bins_per_axis
// evenly spaced centers; bins_per_axis is odd so (0, 0) is exactly
// representable. Token id = token_base + bx * B + by.
//
// Ties (a component exactly halfway between two centers) round half away
// from zero in flow space, so quantization of file dumps is bit-reproducible.
struct FlowCodebook {
    double max_magnitude = 8.0;       // M, pixels per axis
    std::uint32_t bins_per_axis = 17; // B, odd
    Token token_base = 0;             // first flow-content token id

    FlowCodebook() = default;
    FlowCodebook(double m, std::uint32_t b, Token base)
        : max_magnitude(m), bins_per_axis(b), token_base(base) {
        if (!(m > 0.0) || !std::isfinite(m))
            throw validation_error("codebook max_magnitude must be positive and finite");
        if (b < 1 || b % 2 == 0)
            throw validation_error("codebook bins_per_axis must be odd and >= 1");
    }

    std::uint32_t vocab_size() const { return bins_per_axis * bins_per_axis; }

    double bin_spacing() const {
        return bins_per_axis == 1 ? 2.0 * max_magnitude
                                  : 2.0 * max_magnitude / (bins_per_axis - 1);
    }

    std::uint32_t axis_bin(double value) const {
        const double clamped =
            value < -max_magnitude ? -max_magnitude
                                   : (value > max_magnitude ? max_magnitude : value);
        const std::int64_t half = (bins_per_axis - 1) / 2;
        // std::round is round-half-away-from-zero, matching the tie rule.
        std::int64_t k = static_cast<std::int64_t>(std::round(clamped / bin_spacing()));
        if (k < -half) k = -half;
        if (k > half) k = half;
        return static_cast<std::uint32_t>(k + half);
    }

    double axis_center(std::uint32_t bin) const {
        const std::int64_t half = (bins_per_axis - 1) / 2;
        return (static_cast<std::int64_t>(bin) - half) * bin_spacing();
    }

    bool contains_token(Token t) const {
        return t >= token_base && t < token_base + vocab_size();
    }

    bool operator==(const FlowCodebook&) const = default;
};

inline Token quantize_flow(const FlowVector& v, const FlowCodebook& cb) {
    if (!v.finite()) throw validation_error("cannot quantize non-finite flow vector");
    const std::uint32_t bx = cb.axis_bin(v.dx);
    const std::uint32_t by = cb.axis_bin(v.dy);
    return cb.token_base + bx * cb.bins_per_axis + by;
}

inline FlowVector token_center(Token t, const FlowCodebook& cb) {
    if (!cb.contains_token(t))
        throw validation_error("token " + std::to_string(t) + " outside flow-content range");
    const std::uint32_t offset = t - cb.token_base;
    return {cb.axis_center(offset / cb.bins_per_axis),
            cb.axis_center(offset % cb.bins_per_axis)};
}

// The token whose center is exactly (0, 0).
inline Token zero_token(const FlowCodebook& cb) {
    return quantize_flow(FlowVector{0.0, 0.0}, cb);
}

}  // namespace spelke
