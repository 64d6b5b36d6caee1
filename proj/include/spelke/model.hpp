#pragma once

#include <memory>

#include "spelke/codebook.hpp"
#include "spelke/context.hpp"
#include "spelke/fields.hpp"
#include "spelke/grid.hpp"
#include "spelke/vocab.hpp"

namespace spelke {

// One autoregressive completion in progress. query() returns the
// conditional distribution at a location given the session's base context
// plus everything appended so far.
class ModelSession {
 public:
    virtual ~ModelSession() = default;
    virtual CategoricalFlowDistribution query(Location loc) const = 0;
    virtual void append(Location loc, Token token) = 0;
};

// Query contract a flow world model satisfies: given a conditioning
// sequence, produce the categorical distribution over flow-content tokens
// at any location. Implementations must be immutable after construction
// and safe for unlimited concurrent callers.
class WorldModel {
 public:
    virtual ~WorldModel() = default;

    virtual GridShape grid() const = 0;
    virtual VocabularyLayout layout() const = 0;
    virtual FlowCodebook codebook() const = 0;

    virtual CategoricalFlowDistribution query_distribution(const ConditioningContext& ctx,
                                                           Location loc) const = 0;

    // All locations under one context. Backends with cheaper batch paths
    // (the oracle, stored dumps) override this.
    virtual DistributionField query_distribution_field(const ConditioningContext& ctx) const {
        DistributionField field;
        field.grid = grid();
        field.distributions.reserve(field.grid.locations());
        for (Location i = 0; i < field.grid.locations(); ++i)
            field.distributions.push_back(query_distribution(ctx, i));
        return field;
    }

    // Opens an autoregressive session. The default simply grows the
    // context and re-queries; backends that cannot answer grown contexts
    // will surface their unsupported-context error on the first query.
    virtual std::unique_ptr<ModelSession> open_session(const ConditioningContext& base) const;
};

namespace detail {

class GenericSession final : public ModelSession {
 public:
    GenericSession(const WorldModel& model, ConditioningContext ctx)
        : model_(model), ctx_(std::move(ctx)) {}

    CategoricalFlowDistribution query(Location loc) const override {
        return model_.query_distribution(ctx_, loc);
    }
    void append(Location loc, Token token) override { ctx_.decoded.push_back({loc, token}); }

 private:
    const WorldModel& model_;
    ConditioningContext ctx_;
};

}  // namespace detail

inline std::unique_ptr<ModelSession> WorldModel::open_session(
    const ConditioningContext& base) const {
    return std::make_unique<detail::GenericSession>(*this, base);
}

}  // namespace spelke
