#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spelke/codebook.hpp"
#include "spelke/context.hpp"
#include "spelke/epigraphy.hpp"
#include "spelke/fields.hpp"
#include "spelke/model.hpp"
#include "spelke/scene.hpp"
#include "spelke/vocab.hpp"

namespace spelke {

// One latent outcome of a poked scene: a deterministic token field (as
// flow-content offsets) with its prior probability. The observed field is
// this field corrupted independently per location by noise_eps uniform
// token noise.
struct OutcomeMode {
    double prior = 1.0;
    std::vector<std::uint32_t> field;  // token offset per location
};

// Exact rigid-scene world model. All conditionals are computed by Bayes
// rule over a finite set of outcome modes, so every probing formula has a
// brute-force-verifiable ground truth. Deterministic and immutable.
//
// Context semantics:
//  * pokes are interventions: they pick which groups move (the poked
//    group plus its support closure) and with which token; articulated
//    groups branch over the admissible modes that contain the poke.
//  * decoded pairs are observations: the posterior over outcome modes is
//    updated with likelihood (1-eps)*[token == mode field] + eps/|F|.
//  * with no poke at all, the scene follows its spontaneous-motion
//    priors: each group moves with its mobility (carrying everything it
//    supports), and a moving group's token is uniform over the nonzero-
//    center tokens. Only marginal queries are supported there.
class OracleModel final : public WorldModel {
 public:
    OracleModel(SyntheticScene scene, std::uint32_t rgb_content_size, double max_magnitude,
                std::uint32_t bins_per_axis)
        : scene_(std::move(scene)) {
        scene_.validate();
        layout_ = VocabularyLayout(scene_.grid.locations(), rgb_content_size,
                                   bins_per_axis * bins_per_axis);
        codebook_ = FlowCodebook(max_magnitude, bins_per_axis, layout_.flow_content_begin());
        owner_ = scene_.owner_map();
        zero_offset_ = zero_token(codebook_) - codebook_.token_base;
        for (std::uint32_t j = 0; j < codebook_.vocab_size(); ++j)
            if (token_center(codebook_.token_base + j, codebook_).norm() > 0.0)
                movement_offsets_.push_back(j);
        build_move_prior();
    }

    GridShape grid() const override { return scene_.grid; }
    VocabularyLayout layout() const override { return layout_; }
    FlowCodebook codebook() const override { return codebook_; }
    const SyntheticScene& scene() const { return scene_; }

    // Offsets of tokens a spontaneously moving group may carry.
    const std::vector<std::uint32_t>& movement_offsets() const { return movement_offsets_; }

    CategoricalFlowDistribution query_distribution(const ConditioningContext& ctx,
                                                   Location loc) const override {
        check_context(ctx);
        if (!scene_.grid.contains(loc)) throw validation_error("query location out of grid");
        if (ctx.pokes.empty()) return unconditioned_distribution(loc);
        const auto modes = enumerate_modes(ctx.pokes);
        const auto post = posterior_weights(modes, ctx.decoded);
        return mode_mixture(modes, post, loc);
    }

    DistributionField query_distribution_field(const ConditioningContext& ctx) const override {
        check_context(ctx);
        DistributionField out;
        out.grid = scene_.grid;
        out.distributions.resize(scene_.grid.locations());
        if (ctx.pokes.empty()) {
            for (Location i = 0; i < scene_.grid.locations(); ++i)
                out.distributions[i] = unconditioned_distribution(i);
            return out;
        }
        const auto modes = enumerate_modes(ctx.pokes);
        const auto post = posterior_weights(modes, ctx.decoded);
        for (Location i = 0; i < scene_.grid.locations(); ++i)
            out.distributions[i] = mode_mixture(modes, post, i);
        return out;
    }

    std::unique_ptr<ModelSession> open_session(const ConditioningContext& base) const override;

    // The finite latent-mode set induced by a poke list, with priors.
    std::vector<OutcomeMode> enumerate_modes(const std::vector<DecodedPair>& pokes) const {
        std::vector<OutcomeMode> modes;

        // Per-poke admissible branches: (probability, cells that co-move).
        struct PokeBranches {
            std::uint32_t token_offset = 0;
            std::vector<std::pair<double, std::vector<Location>>> branches;
        };
        std::vector<PokeBranches> per_poke;
        for (const auto& poke : pokes) {
            PokeBranches pb;
            pb.token_offset = layout_.flow_offset(poke.token);
            const std::int32_t g = owner_[poke.location];
            const bool zero_poke =
                token_center(poke.token, codebook_).norm() == 0.0;
            if (g < 0 || zero_poke) {
                // Background poke or a zero-motion poke couples to nothing.
                pb.branches.push_back({1.0, {}});
            } else {
                const auto& group = scene_.groups[static_cast<std::uint32_t>(g)];
                std::vector<Location> carried;
                for (std::uint32_t d : scene_.descendants(static_cast<std::uint32_t>(g)))
                    carried.insert(carried.end(), scene_.groups[d].cells.begin(),
                                   scene_.groups[d].cells.end());
                if (group.articulations.empty()) {
                    std::vector<Location> cells = group.cells;
                    cells.insert(cells.end(), carried.begin(), carried.end());
                    pb.branches.push_back({1.0, std::move(cells)});
                } else {
                    double admissible_mass = 0.0;
                    for (const auto& mode : group.articulations)
                        if (std::binary_search(mode.cells.begin(), mode.cells.end(),
                                               poke.location))
                            admissible_mass += mode.probability;
                    if (admissible_mass <= 0.0) {
                        pb.branches.push_back({1.0, {}});
                    } else {
                        for (const auto& mode : group.articulations) {
                            if (!std::binary_search(mode.cells.begin(), mode.cells.end(),
                                                    poke.location))
                                continue;
                            std::vector<Location> cells = mode.cells;
                            cells.insert(cells.end(), carried.begin(), carried.end());
                            pb.branches.push_back(
                                {mode.probability / admissible_mass, std::move(cells)});
                        }
                    }
                }
            }
            per_poke.push_back(std::move(pb));
        }

        // Cartesian product of branch choices across pokes.
        std::vector<std::uint32_t> choice(per_poke.size(), 0);
        while (true) {
            OutcomeMode mode;
            mode.prior = 1.0;
            mode.field.assign(scene_.grid.locations(), zero_offset_);
            // Earlier pokes take precedence where move sets overlap.
            std::vector<std::uint8_t> claimed(scene_.grid.locations(), 0);
            for (std::size_t r = 0; r < per_poke.size(); ++r) {
                const auto& branch = per_poke[r].branches[choice[r]];
                mode.prior *= branch.first;
                for (Location c : branch.second) {
                    if (!claimed[c]) {
                        claimed[c] = 1;
                        mode.field[c] = per_poke[r].token_offset;
                    }
                }
            }
            modes.push_back(std::move(mode));
            std::size_t r = 0;
            for (; r < per_poke.size(); ++r) {
                if (++choice[r] < per_poke[r].branches.size()) break;
                choice[r] = 0;
            }
            if (r == per_poke.size()) break;
        }
        return modes;
    }

    // Posterior over modes given observations; empty when every mode has
    // zero likelihood (possible only with noise_eps == 0).
    std::vector<double> posterior_weights(const std::vector<OutcomeMode>& modes,
                                          const std::vector<DecodedPair>& decoded) const {
        std::vector<double> w(modes.size());
        for (std::size_t m = 0; m < modes.size(); ++m) w[m] = modes[m].prior;
        const double eps = scene_.noise_eps;
        const double noise_mass = eps / static_cast<double>(layout_.flow_content_size);
        for (const auto& obs : decoded) {
            const std::uint32_t offset = layout_.flow_offset(obs.token);
            double total = 0.0;
            for (std::size_t m = 0; m < modes.size(); ++m) {
                const double like =
                    (modes[m].field[obs.location] == offset ? 1.0 - eps : 0.0) + noise_mass;
                w[m] *= like;
                total += w[m];
            }
            if (total <= 0.0) return {};
            for (double& x : w) x /= total;  // renormalize to avoid underflow
        }
        double total = 0.0;
        for (double x : w) total += x;
        if (total <= 0.0) return {};
        for (double& x : w) x /= total;
        return w;
    }

    // Closed-form motion affordance target for the unconditioned scene.
    AffordanceMap gt_affordance(const Epigraphy& epi, double tau) const {
        const auto motion = motion_token_set(epi, tau);
        std::vector<std::uint8_t> in_motion(layout_.flow_content_size, 0);
        for (Token t : motion) in_motion[layout_.flow_offset(t)] = 1;
        std::uint32_t overlap = 0;
        for (std::uint32_t j : movement_offsets_) overlap += in_motion[j];
        const double move_frac =
            movement_offsets_.empty()
                ? 0.0
                : static_cast<double>(overlap) / static_cast<double>(movement_offsets_.size());
        const bool zero_in_motion = in_motion[zero_offset_] != 0;
        const double eps = scene_.noise_eps;
        const double noise_term =
            eps * static_cast<double>(motion.size()) /
            static_cast<double>(layout_.flow_content_size);
        AffordanceMap map;
        map.grid = scene_.grid;
        map.values.resize(scene_.grid.locations());
        for (Location i = 0; i < scene_.grid.locations(); ++i) {
            const double pm = move_prior_[i];
            map.values[i] = (1.0 - eps) * (pm * move_frac + (1.0 - pm) * (zero_in_motion ? 1.0 : 0.0)) +
                            noise_term;
        }
        return map;
    }

    // P(location carries a nonzero token) under the unconditioned priors.
    double move_prior(Location i) const { return move_prior_[i]; }

 private:
    friend class OracleSession;

    void check_context(const ConditioningContext& ctx) const {
        if (ctx.camera != CameraPose::static_camera)
            throw validation_error("oracle probing requires a static camera");
        ctx.validate(scene_.grid);
        if (ctx.pokes.empty() && !ctx.decoded.empty())
            throw model_contract_error(
                "oracle does not support observations without a poke");
    }

    void build_move_prior() {
        move_prior_.assign(scene_.grid.locations(), 0.0);
        for (std::uint32_t g = 0; g < scene_.group_count(); ++g) {
            double carried_stays = 1.0;
            for (std::uint32_t a : scene_.ancestors(g))
                carried_stays *= 1.0 - scene_.groups[a].mobility;
            const auto& group = scene_.groups[g];
            for (Location c : group.cells) {
                double own = group.mobility;
                if (!group.articulations.empty()) {
                    double q = 0.0;
                    for (const auto& mode : group.articulations)
                        if (std::binary_search(mode.cells.begin(), mode.cells.end(), c))
                            q += mode.probability;
                    own *= q;
                }
                move_prior_[c] = 1.0 - carried_stays * (1.0 - own);
            }
        }
    }

    CategoricalFlowDistribution unconditioned_distribution(Location loc) const {
        const double eps = scene_.noise_eps;
        const std::uint32_t f = layout_.flow_content_size;
        CategoricalFlowDistribution dist;
        dist.probabilities.assign(f, eps / static_cast<double>(f));
        const double pm = move_prior_[loc];
        if (!movement_offsets_.empty()) {
            const double share = (1.0 - eps) * pm / static_cast<double>(movement_offsets_.size());
            for (std::uint32_t j : movement_offsets_) dist.probabilities[j] += share;
        }
        dist.probabilities[zero_offset_] += (1.0 - eps) * (1.0 - pm);
        return dist;
    }

    CategoricalFlowDistribution mode_mixture(const std::vector<OutcomeMode>& modes,
                                             const std::vector<double>& posterior,
                                             Location loc) const {
        const std::uint32_t f = layout_.flow_content_size;
        CategoricalFlowDistribution dist;
        if (posterior.empty()) {
            // Observations ruled out every mode: noise-only distribution.
            dist.probabilities.assign(f, 1.0 / static_cast<double>(f));
            return dist;
        }
        const double eps = scene_.noise_eps;
        dist.probabilities.assign(f, eps / static_cast<double>(f));
        for (std::size_t m = 0; m < modes.size(); ++m)
            dist.probabilities[modes[m].field[loc]] += (1.0 - eps) * posterior[m];
        return dist;
    }

    SyntheticScene scene_;
    VocabularyLayout layout_;
    FlowCodebook codebook_;
    std::vector<std::int32_t> owner_;
    std::vector<std::uint32_t> movement_offsets_;
    std::uint32_t zero_offset_ = 0;
    std::vector<double> move_prior_;
};

// Incremental session: keeps the mode posterior up to date per appended
// observation, so a full sequential rollout costs O(l * modes) instead of
// re-scanning the grown context at every step. Numerically this performs
// the same multiplicative updates as posterior_weights.
class OracleSession final : public ModelSession {
 public:
    OracleSession(const OracleModel& oracle, const ConditioningContext& base)
        : oracle_(oracle) {
        oracle_.check_context(base);
        if (base.pokes.empty())
            throw model_contract_error("oracle sessions require at least one poke");
        modes_ = oracle_.enumerate_modes(base.pokes);
        weights_ = oracle_.posterior_weights(modes_, base.decoded);
    }

    CategoricalFlowDistribution query(Location loc) const override {
        if (!oracle_.scene().grid.contains(loc))
            throw validation_error("query location out of grid");
        return oracle_.mode_mixture(modes_, weights_, loc);
    }

    void append(Location loc, Token token) override {
        const std::uint32_t offset = oracle_.layout().flow_offset(token);
        const double eps = oracle_.scene().noise_eps;
        const double noise_mass =
            eps / static_cast<double>(oracle_.layout().flow_content_size);
        if (weights_.empty()) return;  // already in the noise-only regime
        double total = 0.0;
        for (std::size_t m = 0; m < modes_.size(); ++m) {
            const double like =
                (modes_[m].field[loc] == offset ? 1.0 - eps : 0.0) + noise_mass;
            weights_[m] *= like;
            total += weights_[m];
        }
        if (total <= 0.0) {
            weights_.clear();
            return;
        }
        for (double& w : weights_) w /= total;
    }

 private:
    const OracleModel& oracle_;
    std::vector<OutcomeMode> modes_;
    std::vector<double> weights_;
};

inline std::unique_ptr<ModelSession> OracleModel::open_session(
    const ConditioningContext& base) const {
    return std::make_unique<OracleSession>(*this, base);
}

}  // namespace spelke
