#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "spelke/context.hpp"
#include "spelke/epigraphy.hpp"
#include "spelke/fields.hpp"
#include "spelke/model.hpp"
#include "spelke/parallel.hpp"
#include "spelke/probing.hpp"
#include "spelke/rng.hpp"

namespace spelke {

// ---------------------------------------------------------------------------
// Poke placement

// Weighted sampling without replacement from the locations whose
// affordance exceeds tau_p, proportional to affordance. Candidates within
// `min_separation` (Chebyshev) of an accepted point are permanently
// rejected. Returns at most n points.
inline std::vector<Location> sample_poke_locations(const AffordanceMap& aff, double tau_p,
                                                   std::uint32_t n,
                                                   std::uint32_t min_separation,
                                                   std::uint64_t seed) {
    if (!(tau_p >= 0.0 && tau_p < 1.0)) throw validation_error("tau_p must lie in [0, 1)");
    if (n < 1) throw validation_error("poke sample count must be >= 1");

    std::vector<Location> pool;
    std::vector<double> weight;
    for (Location i = 0; i < aff.grid.locations(); ++i) {
        if (aff.values[i] > tau_p) {
            pool.push_back(i);
            weight.push_back(aff.values[i]);
        }
    }
    if (pool.empty())
        throw degenerate_error("no location exceeds the affordance threshold tau_p");

    std::vector<Location> accepted;
    Rng rng(seed);
    while (accepted.size() < n && !pool.empty()) {
        double total = 0.0;
        for (double w : weight) total += w;
        const double u = rng.next_double() * total;
        double cum = 0.0;
        std::size_t pick = pool.size() - 1;
        for (std::size_t k = 0; k < pool.size(); ++k) {
            cum += weight[k];
            if (u < cum) {
                pick = k;
                break;
            }
        }
        const Location chosen = pool[pick];
        accepted.push_back(chosen);
        const auto near = [&](Location c) {
            const std::int64_t dr = std::int64_t(aff.grid.row_of(c)) - aff.grid.row_of(chosen);
            const std::int64_t dc = std::int64_t(aff.grid.col_of(c)) - aff.grid.col_of(chosen);
            return std::max(std::abs(dr), std::abs(dc)) <=
                   static_cast<std::int64_t>(min_separation);
        };
        std::size_t kept = 0;
        for (std::size_t k = 0; k < pool.size(); ++k) {
            if (!near(pool[k])) {
                pool[kept] = pool[k];
                weight[kept] = weight[k];
                ++kept;
            }
        }
        pool.resize(kept);
        weight.resize(kept);
    }
    return accepted;
}

// r_count directions equally spaced on the circle starting at angle 0,
// scaled to `magnitude` and snapped to codebook centers.
inline std::vector<FlowVector> poke_directions(std::uint32_t r_count, double magnitude,
                                               const FlowCodebook& cb) {
    if (r_count < 1) throw validation_error("need at least one poke direction");
    if (!(magnitude > 0.0)) throw validation_error("poke magnitude must be positive");
    if (magnitude > cb.max_magnitude)
        throw validation_error("poke magnitude exceeds codebook max_magnitude");
    std::vector<FlowVector> dirs;
    dirs.reserve(r_count);
    for (std::uint32_t r = 0; r < r_count; ++r) {
        const double angle = 2.0 * std::numbers::pi * r / r_count;
        const FlowVector raw{magnitude * std::cos(angle), magnitude * std::sin(angle)};
        dirs.push_back(token_center(quantize_flow(raw, cb), cb));
    }
    return dirs;
}

// ---------------------------------------------------------------------------
// Motion correlation + Otsu

// dot-bar[u] = (1/R) sum_r <direction_r, E_disp_r[u]>, raw dot products.
inline MotionCorrelationMap motion_correlation_map(const std::vector<Poke>& pokes,
                                                   const std::vector<DisplacementMap>& maps) {
    if (pokes.empty() || pokes.size() != maps.size())
        throw validation_error("need equally many pokes and displacement maps");
    const GridShape grid = maps.front().grid;
    for (const auto& m : maps)
        if (!(m.grid == grid)) throw validation_error("displacement maps disagree on grid");
    MotionCorrelationMap out;
    out.grid = grid;
    out.values.assign(grid.locations(), 0.0);
    for (std::size_t r = 0; r < pokes.size(); ++r)
        for (Location u = 0; u < grid.locations(); ++u)
            out.values[u] += dot(pokes[r].direction, maps[r].vectors[u]);
    const double inv = 1.0 / static_cast<double>(pokes.size());
    for (double& v : out.values) v *= inv;
    return out;
}

struct OtsuResult {
    double threshold = 0.0;
    std::vector<std::uint8_t> above;  // per input value: 1 if in the upper class
    bool degenerate = false;          // all inputs equal; no split exists
};

// Otsu's method over a 256-bin histogram on [min, max]: picks the split
// maximizing between-class variance; ties take the lowest threshold. The
// class of a value is decided by its histogram bin, and the reported
// threshold is the upper edge of the last lower-class bin.
inline OtsuResult otsu_threshold(std::span<const double> values) {
    constexpr std::uint32_t kBins = 256;
    OtsuResult result;
    if (values.size() < 2) {
        result.degenerate = true;
        result.above.assign(values.size(), 0);
        return result;
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) {
        result.degenerate = true;
        result.threshold = lo;
        result.above.assign(values.size(), 0);
        return result;
    }
    const double scale = static_cast<double>(kBins) / (hi - lo);
    std::vector<std::uint32_t> bin_of(values.size());
    std::vector<double> count(kBins, 0.0), mass(kBins, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t b = static_cast<std::uint32_t>((values[i] - lo) * scale);
        if (b >= kBins) b = kBins - 1;
        bin_of[i] = b;
        count[b] += 1.0;
        mass[b] += values[i];
    }
    double total_count = static_cast<double>(values.size());
    double total_mass = 0.0;
    for (double m : mass) total_mass += m;

    double best_var = -1.0;
    std::uint32_t best_split = 0;
    double c0 = 0.0, m0 = 0.0;
    for (std::uint32_t s = 0; s + 1 < kBins; ++s) {
        c0 += count[s];
        m0 += mass[s];
        const double c1 = total_count - c0;
        if (c0 == 0.0 || c1 == 0.0) continue;
        const double mu0 = m0 / c0;
        const double mu1 = (total_mass - m0) / c1;
        const double var = c0 * c1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_split = s;
        }
    }
    if (best_var < 0.0) {
        // Every value landed in one bin despite hi > lo (cannot happen with
        // 256 bins and hi > lo, but keep the degenerate contract anyway).
        result.degenerate = true;
        result.threshold = lo;
        result.above.assign(values.size(), 0);
        return result;
    }
    result.threshold = lo + (best_split + 1) * (hi - lo) / kBins;
    result.above.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        result.above[i] = bin_of[i] > best_split ? 1 : 0;
    return result;
}

inline SegmentMask otsu_mask(const GridShape& grid, std::span<const double> values) {
    const OtsuResult res = otsu_threshold(values);
    SegmentMask mask = make_empty_mask(grid);
    mask.degenerate = res.degenerate;
    if (!res.degenerate)
        for (Location i = 0; i < grid.locations(); ++i) mask.inside[i] = res.above[i];
    return mask;
}

// ---------------------------------------------------------------------------
// Point-prompted extraction

struct ProbeParams {
    std::uint32_t directions = 8;   // R
    std::uint32_t rollouts = 3;     // T, sequential mode only
    double magnitude = 4.0;         // poke strength in pixels
    DecodeMode mode = DecodeMode::sequential;
    bool component_filter = true;   // keep only the prompt's 4-connected component
    std::uint32_t jobs = 1;
};

// Pokes the prompt point in R directions, averages poke-displacement
// correlations, and Otsu-thresholds the result. The returned mask is
// restricted to the prompt's connected component unless disabled.
inline SegmentMask segment_from_point(const WorldModel& model, Location point,
                                      const Epigraphy& epi, const ProbeParams& params,
                                      std::uint64_t seed) {
    const GridShape grid = model.grid();
    if (!grid.contains(point)) throw validation_error("prompt point outside grid");

    const auto dirs = poke_directions(params.directions, params.magnitude, model.codebook());
    std::vector<Poke> pokes;
    pokes.reserve(dirs.size());
    for (const auto& d : dirs) pokes.push_back(make_poke(point, d, model.codebook()));

    std::vector<DisplacementMap> maps(pokes.size());
    if (params.mode == DecodeMode::parallel) {
        parallel_for(params.jobs, pokes.size(), [&](std::size_t r) {
            maps[r] = expected_displacement_parallel(model, pokes[r], epi);
        });
    } else {
        // Rollouts for all (r, t) pairs form one flat work list.
        std::vector<FlowField> fields(pokes.size() * params.rollouts);
        parallel_for(params.jobs, fields.size(), [&](std::size_t k) {
            const std::size_t r = k / params.rollouts;
            const std::size_t t = k % params.rollouts;
            fields[k] = decode_flow_sequential(model, pokes[r], derive_seed(seed, {r, t}), epi);
        });
        for (std::size_t r = 0; r < pokes.size(); ++r) {
            DisplacementMap m;
            m.grid = grid;
            m.mode = DecodeMode::sequential;
            m.rollouts = params.rollouts;
            m.vectors.assign(grid.locations(), FlowVector{0.0, 0.0});
            for (std::uint32_t t = 0; t < params.rollouts; ++t) {
                const auto& f = fields[r * params.rollouts + t];
                for (Location i = 0; i < grid.locations(); ++i)
                    m.vectors[i] = m.vectors[i] + f.vectors[i];
            }
            const double inv = 1.0 / params.rollouts;
            for (auto& v : m.vectors) v = v * inv;
            maps[r] = std::move(m);
        }
    }

    const MotionCorrelationMap corr = motion_correlation_map(pokes, maps);
    SegmentMask mask = otsu_mask(grid, corr.values);
    mask.prompt = point;
    if (mask.degenerate) return mask;
    if (params.component_filter) {
        SegmentMask component = connected_component(mask, point);
        component.prompt = point;
        component.degenerate = component.empty();
        return component;
    }
    return mask;
}

// ---------------------------------------------------------------------------
// Automatic discovery

// phi[u]: the concatenation of every rollout's flow vector at u, in fixed
// (poke point, direction, rollout, axis) order. Length 2*N*R*T.
struct DescriptorField {
    GridShape grid;
    std::uint32_t pokes = 0;       // N
    std::uint32_t directions = 0;  // R
    std::uint32_t rollouts = 0;    // T
    std::vector<double> data;      // [location][2NRT]

    std::uint32_t length() const { return 2 * pokes * directions * rollouts; }
    std::span<const double> descriptor(Location u) const {
        return {data.data() + static_cast<std::size_t>(u) * length(), length()};
    }
};

inline DescriptorField build_motion_descriptors(const WorldModel& model,
                                                const std::vector<Location>& poke_points,
                                                std::uint32_t directions, std::uint32_t rollouts,
                                                double magnitude, std::uint64_t seed,
                                                const Epigraphy& epi, std::uint32_t jobs = 1) {
    if (poke_points.empty()) throw validation_error("descriptors need at least one poke point");
    const GridShape grid = model.grid();
    const auto dirs = poke_directions(directions, magnitude, model.codebook());

    DescriptorField desc;
    desc.grid = grid;
    desc.pokes = static_cast<std::uint32_t>(poke_points.size());
    desc.directions = directions;
    desc.rollouts = rollouts;
    desc.data.assign(static_cast<std::size_t>(grid.locations()) * desc.length(), 0.0);

    const std::size_t total = static_cast<std::size_t>(desc.pokes) * directions * rollouts;
    parallel_for(jobs, total, [&](std::size_t k) {
        const std::size_t n = k / (directions * rollouts);
        const std::size_t r = (k / rollouts) % directions;
        const std::size_t t = k % rollouts;
        const Poke poke = make_poke(poke_points[n], dirs[r], model.codebook());
        const FlowField field = decode_flow_sequential(
            model, poke, derive_seed(seed, {n, r, t}), epi);
        for (Location u = 0; u < grid.locations(); ++u) {
            double* out = desc.data.data() + static_cast<std::size_t>(u) * desc.length() + 2 * k;
            out[0] = field.vectors[u].dx;
            out[1] = field.vectors[u].dy;
        }
    });
    return desc;
}

// Dense Gram matrix of descriptors, A[u, v] = phi[u] . phi[v].
struct AffinityMatrix {
    GridShape grid;
    std::vector<double> data;  // row-major l x l

    double at(Location u, Location v) const {
        return data[static_cast<std::size_t>(u) * grid.locations() + v];
    }
    std::span<const double> row(Location u) const {
        return {data.data() + static_cast<std::size_t>(u) * grid.locations(),
                grid.locations()};
    }
};

inline AffinityMatrix affinity_matrix(const DescriptorField& desc, std::uint32_t jobs = 1) {
    const std::uint32_t l = desc.grid.locations();
    AffinityMatrix aff;
    aff.grid = desc.grid;
    aff.data.assign(static_cast<std::size_t>(l) * l, 0.0);
    parallel_for(jobs, l, [&](std::size_t u) {
        const auto pu = desc.descriptor(static_cast<Location>(u));
        for (std::uint32_t v = 0; v < l; ++v) {
            const auto pv = desc.descriptor(v);
            double s = 0.0;
            for (std::uint32_t k = 0; k < desc.length(); ++k) s += pu[k] * pv[k];
            aff.data[u * l + v] = s;
        }
    });
    return aff;
}

// Affinity rows at the poke centers only; all the clustering loop reads.
// Keeps memory linear in N for grids where the dense matrix is too large.
struct AffinityRows {
    GridShape grid;
    std::vector<Location> centers;
    std::vector<double> rows;  // [center index][location]

    std::span<const double> row(std::size_t k) const {
        return {rows.data() + k * grid.locations(), grid.locations()};
    }
};

inline AffinityRows affinity_rows(const DescriptorField& desc,
                                  const std::vector<Location>& centers,
                                  std::uint32_t jobs = 1) {
    const std::uint32_t l = desc.grid.locations();
    AffinityRows out;
    out.grid = desc.grid;
    out.centers = centers;
    out.rows.assign(centers.size() * static_cast<std::size_t>(l), 0.0);
    parallel_for(jobs, centers.size(), [&](std::size_t k) {
        const auto pc = desc.descriptor(centers[k]);
        for (std::uint32_t v = 0; v < l; ++v) {
            const auto pv = desc.descriptor(v);
            double s = 0.0;
            for (std::uint32_t j = 0; j < desc.length(); ++j) s += pc[j] * pv[j];
            out.rows[k * l + v] = s;
        }
    });
    return out;
}

// Iterative select-threshold-refine clustering over center affinity rows:
// pick the remaining center with the highest mean row, Otsu its row into
// an initial mask, average the rows of remaining centers inside that mask
// and Otsu again for the refined mask, then claim pixels and retire every
// center the refined mask covers. Emitted masks are pairwise disjoint
// (earlier masks take priority).
inline std::vector<SegmentMask> discover_all_segments(const AffinityRows& aff) {
    if (aff.centers.empty()) throw validation_error("discovery needs at least one poke point");
    const std::uint32_t l = aff.grid.locations();
    std::vector<std::uint8_t> active(aff.centers.size(), 1);
    std::vector<std::uint8_t> claimed(l, 0);
    std::vector<SegmentMask> segments;

    std::vector<double> row_mean(aff.centers.size(), 0.0);
    for (std::size_t k = 0; k < aff.centers.size(); ++k) {
        double s = 0.0;
        for (double v : aff.row(k)) s += v;
        row_mean[k] = s / l;
    }

    std::uint32_t remaining = static_cast<std::uint32_t>(aff.centers.size());
    std::uint32_t cluster_id = 0;
    while (remaining > 0) {
        std::size_t best = aff.centers.size();
        for (std::size_t k = 0; k < aff.centers.size(); ++k)
            if (active[k] && (best == aff.centers.size() || row_mean[k] > row_mean[best]))
                best = k;

        const SegmentMask initial = otsu_mask(aff.grid, aff.row(best));

        // Average the rows of all remaining centers inside the initial mask.
        std::vector<double> avg(l, 0.0);
        std::uint32_t inside_count = 0;
        for (std::size_t k = 0; k < aff.centers.size(); ++k) {
            if (!active[k] || !initial.contains(aff.centers[k])) continue;
            const auto row = aff.row(k);
            for (std::uint32_t v = 0; v < l; ++v) avg[v] += row[v];
            ++inside_count;
        }
        SegmentMask refined;
        if (inside_count == 0) {
            refined = make_empty_mask(aff.grid);
            refined.degenerate = true;
        } else {
            for (double& v : avg) v /= inside_count;
            refined = otsu_mask(aff.grid, avg);
        }

        // Retire the selected center plus every center the refined mask
        // covers (before overlap subtraction, so covered centers are
        // consumed even if an earlier mask already owns their pixels).
        for (std::size_t k = 0; k < aff.centers.size(); ++k) {
            if (active[k] && (k == best || refined.contains(aff.centers[k]))) {
                active[k] = 0;
                --remaining;
            }
        }

        SegmentMask emitted = make_empty_mask(aff.grid);
        emitted.degenerate = refined.degenerate;
        for (Location v = 0; v < l; ++v) {
            if (refined.contains(v) && !claimed[v]) {
                emitted.inside[v] = 1;
                claimed[v] = 1;
            }
        }
        emitted.prompt = aff.centers[best];
        emitted.cluster_id = cluster_id++;
        segments.push_back(std::move(emitted));
    }
    return segments;
}

inline std::vector<SegmentMask> discover_all_segments(const AffinityMatrix& aff,
                                                      const std::vector<Location>& centers) {
    AffinityRows rows;
    rows.grid = aff.grid;
    rows.centers = centers;
    rows.rows.reserve(centers.size() * static_cast<std::size_t>(aff.grid.locations()));
    for (Location c : centers) {
        const auto row = aff.row(c);
        rows.rows.insert(rows.rows.end(), row.begin(), row.end());
    }
    return discover_all_segments(rows);
}

}  // namespace spelke
