#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "spelke/context.hpp"
#include "spelke/epigraphy.hpp"
#include "spelke/fields.hpp"
#include "spelke/model.hpp"
#include "spelke/parallel.hpp"
#include "spelke/rng.hpp"

namespace spelke {

// p_motion: per location, the probability mass the unconditioned
// (poke-free, static-camera) distribution places on tokens whose
// representative vector moves by more than tau.
inline AffordanceMap motion_affordance(const WorldModel& model, const Epigraphy& epi,
                                       double tau) {
    const auto motion = motion_token_set(epi, tau);
    std::vector<std::uint32_t> offsets;
    offsets.reserve(motion.size());
    for (Token t : motion) offsets.push_back(model.layout().flow_offset(t));

    ConditioningContext ctx;  // static camera, no pokes, nothing decoded
    const DistributionField field = model.query_distribution_field(ctx);

    AffordanceMap map;
    map.grid = field.grid;
    map.values.resize(field.grid.locations());
    for (Location i = 0; i < field.grid.locations(); ++i) {
        double p = 0.0;
        for (std::uint32_t j : offsets) p += field.distributions[i].probabilities[j];
        map.values[i] = std::clamp(p, 0.0, 1.0);
    }
    return map;
}

namespace detail {

// Conditioned locations (the poke) are never sampled: every outcome mode
// agrees there, so the consensus token is read off as the argmax.
inline std::uint32_t consensus_offset(const CategoricalFlowDistribution& dist) {
    return static_cast<std::uint32_t>(
        std::max_element(dist.probabilities.begin(), dist.probabilities.end()) -
        dist.probabilities.begin());
}

}  // namespace detail

// One-shot completion: every location sampled independently from the
// poke-conditioned distribution. Deterministic given seed; location i
// draws from its own derived stream so the result does not depend on
// evaluation order.
inline FlowField decode_flow_parallel(const WorldModel& model, const Poke& poke,
                                      std::uint64_t seed, const Epigraphy& epi) {
    const DistributionField dists = model.query_distribution_field(poke_context(poke));
    const Token base = model.layout().flow_content_begin();
    FlowField field;
    field.grid = dists.grid;
    field.vectors.resize(field.grid.locations());
    field.tokens.resize(field.grid.locations());
    for (Location i = 0; i < field.grid.locations(); ++i) {
        std::uint32_t offset;
        if (i == poke.location) {
            offset = detail::consensus_offset(dists.distributions[i]);
        } else {
            Rng rng(derive_seed(seed, {i}));
            offset = dists.distributions[i].sample_offset(rng.next_double());
        }
        field.tokens[i] = base + offset;
        field.vectors[i] = epi.vector_at_offset(offset);
    }
    return field;
}

// Autoregressive completion: visit the non-poked locations in a seeded
// uniform random permutation, sampling each from the distribution
// conditioned on the poke plus everything decoded so far.
inline FlowField decode_flow_sequential(const WorldModel& model, const Poke& poke,
                                        std::uint64_t seed, const Epigraphy& epi) {
    auto session = model.open_session(poke_context(poke));
    const Token base = model.layout().flow_content_begin();
    const GridShape grid = model.grid();

    FlowField field;
    field.grid = grid;
    field.vectors.resize(grid.locations());
    field.tokens.resize(grid.locations());

    {
        const std::uint32_t offset = detail::consensus_offset(session->query(poke.location));
        field.tokens[poke.location] = base + offset;
        field.vectors[poke.location] = epi.vector_at_offset(offset);
    }

    std::vector<Location> order;
    order.reserve(grid.locations() - 1);
    for (Location i = 0; i < grid.locations(); ++i)
        if (i != poke.location) order.push_back(i);

    Rng rng(seed);
    rng.shuffle(order);
    for (Location loc : order) {
        const CategoricalFlowDistribution dist = session->query(loc);
        const std::uint32_t offset = dist.sample_offset(rng.next_double());
        const Token token = base + offset;
        session->append(loc, token);
        field.tokens[loc] = token;
        field.vectors[loc] = epi.vector_at_offset(offset);
    }
    return field;
}

// E_disp over an explicit distribution field: the exact probability-
// weighted sum of representative vectors at every location.
inline DisplacementMap expected_displacement_from_field(const DistributionField& dists,
                                                        const Epigraphy& epi) {
    DisplacementMap map;
    map.grid = dists.grid;
    map.mode = DecodeMode::parallel;
    map.vectors.resize(dists.grid.locations());
    for (Location i = 0; i < dists.grid.locations(); ++i) {
        FlowVector sum{0.0, 0.0};
        const auto& p = dists.distributions[i].probabilities;
        for (std::uint32_t j = 0; j < p.size(); ++j) {
            sum.dx += p[j] * epi.vector_at_offset(j).dx;
            sum.dy += p[j] * epi.vector_at_offset(j).dy;
        }
        map.vectors[i] = sum;
    }
    return map;
}

inline DisplacementMap expected_displacement_parallel(const WorldModel& model,
                                                      const Poke& poke,
                                                      const Epigraphy& epi) {
    return expected_displacement_from_field(model.query_distribution_field(poke_context(poke)),
                                            epi);
}

// Mean of T sequential rollouts. Rollout t uses the stream derived from
// (seed, t); the sum is reduced in rollout order, so the result is
// byte-identical for any jobs value.
inline DisplacementMap expected_displacement_sequential(const WorldModel& model,
                                                        const Poke& poke,
                                                        const Epigraphy& epi,
                                                        std::uint32_t rollouts,
                                                        std::uint64_t seed,
                                                        std::uint32_t jobs = 1) {
    if (rollouts < 1) throw validation_error("sequential displacement needs T >= 1");
    std::vector<FlowField> fields(rollouts);
    parallel_for(jobs, rollouts, [&](std::size_t t) {
        fields[t] = decode_flow_sequential(model, poke, derive_seed(seed, {t}), epi);
    });
    DisplacementMap map;
    map.grid = model.grid();
    map.mode = DecodeMode::sequential;
    map.rollouts = rollouts;
    map.vectors.assign(map.grid.locations(), FlowVector{0.0, 0.0});
    for (std::uint32_t t = 0; t < rollouts; ++t)
        for (Location i = 0; i < map.grid.locations(); ++i)
            map.vectors[i] = map.vectors[i] + fields[t].vectors[i];
    const double inv = 1.0 / static_cast<double>(rollouts);
    for (auto& v : map.vectors) v = v * inv;
    return map;
}

}  // namespace spelke
