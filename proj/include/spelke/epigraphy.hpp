#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spelke/codebook.hpp"
#include "spelke/common.hpp"
#include "spelke/flow.hpp"

namespace spelke {

// Token -> representative flow vector table for the flow-content range.
// "Analytic" epigraphy reads bin centers straight off a grid codebook;
// "empirical" epigraphy averages the continuous vectors of a corpus that
// quantize to each token, which is how meaning is recovered for learned
// tokenizers whose codes are not interpretable in isolation.
struct Epigraphy {
    enum class Provenance { analytic, empirical };

    Token token_base = 0;
    Provenance provenance = Provenance::analytic;
    std::vector<FlowVector> vectors;       // indexed by token - token_base
    std::vector<bool> fallback;            // true where an empirical bin was empty

    std::uint32_t size() const { return static_cast<std::uint32_t>(vectors.size()); }

    const FlowVector& vector_for(Token t) const {
        if (t < token_base || t >= token_base + size())
            throw validation_error("epigraphy lookup outside flow-content range");
        return vectors[t - token_base];
    }

    const FlowVector& vector_at_offset(std::uint32_t offset) const {
        return vectors.at(offset);
    }
};

inline Epigraphy analytic_epigraphy(const FlowCodebook& cb) {
    Epigraphy epi;
    epi.token_base = cb.token_base;
    epi.provenance = Epigraphy::Provenance::analytic;
    epi.vectors.reserve(cb.vocab_size());
    for (std::uint32_t j = 0; j < cb.vocab_size(); ++j)
        epi.vectors.push_back(token_center(cb.token_base + j, cb));
    epi.fallback.assign(cb.vocab_size(), false);
    return epi;
}

// Mean of all corpus vectors that quantize to each token. Tokens no corpus
// vector maps to fall back to the analytic bin center and are flagged.
inline Epigraphy empirical_epigraphy(const std::vector<std::vector<FlowVector>>& corpus,
                                     const FlowCodebook& cb) {
    if (corpus.empty()) throw validation_error("empirical epigraphy needs a non-empty corpus");
    std::vector<FlowVector> sums(cb.vocab_size());
    std::vector<std::uint64_t> counts(cb.vocab_size(), 0);
    for (const auto& field : corpus) {
        for (const auto& v : field) {
            const std::uint32_t offset = quantize_flow(v, cb) - cb.token_base;
            sums[offset] = sums[offset] + v;
            ++counts[offset];
        }
    }
    Epigraphy epi;
    epi.token_base = cb.token_base;
    epi.provenance = Epigraphy::Provenance::empirical;
    epi.vectors.resize(cb.vocab_size());
    epi.fallback.assign(cb.vocab_size(), false);
    for (std::uint32_t j = 0; j < cb.vocab_size(); ++j) {
        if (counts[j] > 0) {
            epi.vectors[j] = sums[j] * (1.0 / static_cast<double>(counts[j]));
        } else {
            epi.vectors[j] = token_center(cb.token_base + j, cb);
            epi.fallback[j] = true;
        }
    }
    return epi;
}

// Tokens whose representative vector moves by more than tau pixels.
inline std::vector<Token> motion_token_set(const Epigraphy& epi, double tau) {
    if (!(tau >= 0.0)) throw validation_error("motion threshold tau must be >= 0");
    std::vector<Token> out;
    for (std::uint32_t j = 0; j < epi.size(); ++j)
        if (epi.vectors[j].norm() > tau) out.push_back(epi.token_base + j);
    return out;
}

}  // namespace spelke
