#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "spelke/codebook.hpp"
#include "spelke/epigraphy.hpp"
#include "spelke/grid.hpp"
#include "spelke/rng.hpp"
#include "spelke/vocab.hpp"

using namespace spelke;

namespace {

// Small fixture shared by the (M=2, B=5) examples: integer bin centers in
// [-2, 2] per axis.
FlowCodebook small_codebook(Token base = 100) { return FlowCodebook(2.0, 5, base); }

}  // namespace

TEST_CASE("vocabulary ranges partition the id space") {
    const GridShape grid(3, 4);
    const VocabularyLayout layout = make_layout(grid, 7, 25);

    CHECK(layout.rgb_pointer_begin() == 0);
    CHECK(layout.rgb_content_begin() == 12);
    CHECK(layout.flow_pointer_begin() == 19);
    CHECK(layout.flow_content_begin() == 31);
    CHECK(layout.total_size() == 56);

    // Disjoint and covering: each id falls in exactly one range.
    for (Token t = 0; t < layout.total_size(); ++t) {
        int ranges = 0;
        ranges += t < layout.rgb_content_begin() ? 1 : 0;
        ranges += (t >= layout.rgb_content_begin() && t < layout.flow_pointer_begin()) ? 1 : 0;
        ranges += layout.is_flow_pointer(t) ? 1 : 0;
        ranges += layout.is_flow_content(t) ? 1 : 0;
        CHECK(ranges == 1);
    }
    CHECK_FALSE(layout.is_flow_content(layout.total_size()));
}

TEST_CASE("grid location indices round-trip") {
    const GridShape grid(5, 7);
    for (Location i = 0; i < grid.locations(); ++i)
        CHECK(grid.at(grid.row_of(i), grid.col_of(i)) == i);
    CHECK_THROWS_AS(GridShape(0, 3), validation_error);
}

TEST_CASE("quantize_flow maps to the nearest bin center") {
    const FlowCodebook cb = small_codebook();

    CHECK(quantize_flow({0.0, 0.0}, cb) == cb.token_base + 2 * 5 + 2);
    // bx from 0.4 -> center 0 (bin 2), by from -1.2 -> center -1 (bin 1)
    CHECK(quantize_flow({0.4, -1.2}, cb) == cb.token_base + 2 * 5 + 1);
    // clamped to the max bin on both axes
    CHECK(quantize_flow({10.0, 10.0}, cb) == cb.token_base + 4 * 5 + 4);
}

TEST_CASE("quantize_flow ties round half away from zero") {
    const FlowCodebook cb = small_codebook();
    CHECK(token_center(quantize_flow({0.5, -0.5}, cb), cb) == FlowVector{1.0, -1.0});
    CHECK(token_center(quantize_flow({1.5, -1.5}, cb), cb) == FlowVector{2.0, -2.0});
}

TEST_CASE("quantize_flow rejects non-finite input") {
    const FlowCodebook cb = small_codebook();
    CHECK_THROWS_AS(quantize_flow({std::nan(""), 0.0}, cb), validation_error);
    CHECK_THROWS_AS(quantize_flow({0.0, INFINITY}, cb), validation_error);
}

TEST_CASE("token_center inverts quantization over the whole codebook") {
    const FlowCodebook cb = small_codebook();
    CHECK(token_center(cb.token_base + 2 * 5 + 2, cb) == FlowVector{0.0, 0.0});
    CHECK(token_center(cb.token_base + 4 * 5 + 4, cb) == FlowVector{2.0, 2.0});
    for (Token t = cb.token_base; t < cb.token_base + cb.vocab_size(); ++t)
        CHECK(quantize_flow(token_center(t, cb), cb) == t);
    CHECK_THROWS_AS(token_center(cb.token_base + cb.vocab_size(), cb), validation_error);
    CHECK_THROWS_AS(FlowCodebook(2.0, 4, 0), validation_error);
}

TEST_CASE("empirical epigraphy averages what quantizes together") {
    const FlowCodebook cb = small_codebook();

    SECTION("corpus of pure bin centers reproduces the analytic table") {
        std::vector<FlowVector> field;
        for (Token t = cb.token_base; t < cb.token_base + cb.vocab_size(); ++t)
            field.push_back(token_center(t, cb));
        const Epigraphy epi = empirical_epigraphy({field}, cb);
        const Epigraphy analytic = analytic_epigraphy(cb);
        for (std::uint32_t j = 0; j < cb.vocab_size(); ++j) {
            CHECK(epi.vectors[j] == analytic.vectors[j]);
            CHECK_FALSE(epi.fallback[j]);
        }
    }

    SECTION("bin mean of two nearby vectors") {
        const Epigraphy epi = empirical_epigraphy({{{0.9, 0.0}, {1.1, 0.0}}}, cb);
        const Token one_zero = quantize_flow({1.0, 0.0}, cb);
        CHECK(epi.vector_for(one_zero).dx == Catch::Approx(1.0));
        CHECK(epi.vector_for(one_zero).dy == 0.0);
        CHECK_FALSE(epi.fallback[one_zero - cb.token_base]);
        // every untouched bin fell back to its center and is flagged
        const Token zero = quantize_flow({0.0, 0.0}, cb);
        CHECK(epi.fallback[zero - cb.token_base]);
        CHECK(epi.vector_for(zero) == FlowVector{0.0, 0.0});
    }

    CHECK_THROWS_AS(empirical_epigraphy({}, cb), validation_error);
}

TEST_CASE("motion_token_set thresholds representative vectors") {
    const FlowCodebook cb = small_codebook();
    const Epigraphy epi = analytic_epigraphy(cb);

    // Brute-force enumeration of centers for each threshold.
    const auto expect_count = [&](double tau) {
        std::size_t n = 0;
        for (std::uint32_t j = 0; j < cb.vocab_size(); ++j)
            if (epi.vectors[j].norm() > tau) ++n;
        return n;
    };

    CHECK(motion_token_set(epi, 0.0).size() == 24);
    CHECK(expect_count(0.0) == 24);
    CHECK(motion_token_set(epi, 2.0 * std::sqrt(2.0)).empty());
    const auto at_half = motion_token_set(epi, 0.5);
    CHECK(at_half.size() == expect_count(0.5));
    for (Token t : at_half) CHECK(token_center(t, cb).norm() >= 1.0);

    // Monotone decreasing in tau (set inclusion).
    Rng rng(7);
    double prev_tau = 0.0;
    auto prev = motion_token_set(epi, prev_tau);
    for (int step = 0; step < 20; ++step) {
        const double tau = prev_tau + rng.next_double();
        const auto cur = motion_token_set(epi, tau);
        std::set<Token> prev_set(prev.begin(), prev.end());
        for (Token t : cur) CHECK(prev_set.count(t) == 1);
        prev = cur;
        prev_tau = tau;
    }
    CHECK_THROWS_AS(motion_token_set(epi, -0.1), validation_error);
}
