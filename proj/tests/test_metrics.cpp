#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "spelke/metrics.hpp"
#include "spelke/rng.hpp"

using namespace spelke;

namespace {

SegmentMask mask_of(const GridShape& grid, const std::vector<Location>& cells) {
    SegmentMask m = make_empty_mask(grid);
    for (Location c : cells) m.inside[c] = 1;
    return m;
}

SegmentMask rect_mask(const GridShape& grid, std::uint32_t r0, std::uint32_t c0, std::uint32_t h,
                      std::uint32_t w) {
    SegmentMask m = make_empty_mask(grid);
    for (std::uint32_t r = r0; r < r0 + h; ++r)
        for (std::uint32_t c = c0; c < c0 + w; ++c) m.inside[grid.at(r, c)] = 1;
    return m;
}

// Brute-force minimum-cost assignment over all ways of injecting rows
// into columns (or columns into rows when there are more rows).
double brute_force_assignment(const std::vector<std::vector<double>>& cost,
                              std::vector<std::int32_t>& best_rows) {
    const std::size_t rows = cost.size();
    const std::size_t cols = rows == 0 ? 0 : cost[0].size();
    std::vector<std::int32_t> cols_perm(std::max(rows, cols));
    std::iota(cols_perm.begin(), cols_perm.end(), 0);
    double best = 1e300;
    best_rows.assign(rows, -1);
    std::sort(cols_perm.begin(), cols_perm.end());
    do {
        double total = 0.0;
        for (std::size_t r = 0; r < rows; ++r)
            if (static_cast<std::size_t>(cols_perm[r]) < cols) total += cost[r][cols_perm[r]];
        if (total < best - 1e-12) {
            best = total;
            for (std::size_t r = 0; r < rows; ++r)
                best_rows[r] =
                    static_cast<std::size_t>(cols_perm[r]) < cols ? cols_perm[r] : -1;
        }
    } while (std::next_permutation(cols_perm.begin(), cols_perm.end()));
    return best;
}

}  // namespace

TEST_CASE("iou basics") {
    const GridShape grid(4, 4);
    const SegmentMask a = rect_mask(grid, 0, 0, 2, 2);

    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, rect_mask(grid, 2, 2, 2, 2)) == 0.0);

    // two 4-pixel masks sharing 2 pixels: 2 / 6
    const SegmentMask b = mask_of(grid, {0, 1, 4, 5});
    const SegmentMask c = mask_of(grid, {1, 2, 5, 6});
    CHECK(iou(b, c) == Catch::Approx(2.0 / 6.0));

    const auto both_empty = iou_checked(make_empty_mask(grid), make_empty_mask(grid));
    CHECK(both_empty.value == 0.0);
    CHECK(both_empty.degenerate);

    SegmentMask other_grid = make_empty_mask(GridShape(3, 3));
    CHECK_THROWS_AS(iou(a, other_grid), validation_error);
}

TEST_CASE("point_prompt picks the centroid or the innermost point") {
    const GridShape grid(9, 9);

    SECTION("filled rectangle: its center") {
        const SegmentMask rect = rect_mask(grid, 2, 2, 3, 5);
        CHECK(point_prompt(rect) == grid.at(3, 4));
    }

    SECTION("single pixel") {
        CHECK(point_prompt(mask_of(grid, {grid.at(7, 1)})) == grid.at(7, 1));
    }

    SECTION("ring whose centroid falls into the hole") {
        SegmentMask ring = rect_mask(grid, 1, 1, 7, 7);
        for (std::uint32_t r = 3; r <= 5; ++r)
            for (std::uint32_t c = 3; c <= 5; ++c) ring.inside[grid.at(r, c)] = 0;
        const Location prompt = point_prompt(ring);
        CHECK(ring.contains(prompt));

        // Brute-force distance transform over the mask.
        std::uint64_t best_d2 = 0;
        Location best = 0;
        for (Location u = 0; u < grid.locations(); ++u) {
            if (!ring.contains(u)) continue;
            std::uint64_t d2 = ~0ull;
            for (Location v = 0; v < grid.locations(); ++v) {
                if (ring.contains(v)) continue;
                const std::int64_t dr = std::int64_t(grid.row_of(u)) - grid.row_of(v);
                const std::int64_t dc = std::int64_t(grid.col_of(u)) - grid.col_of(v);
                d2 = std::min<std::uint64_t>(d2, static_cast<std::uint64_t>(dr * dr + dc * dc));
            }
            if (d2 > best_d2) {
                best_d2 = d2;
                best = u;
            }
        }
        CHECK(prompt == best);
    }

    CHECK_THROWS_AS(point_prompt(make_empty_mask(grid)), validation_error);
}

TEST_CASE("average recall over the default threshold grid") {
    const auto thresholds = default_iou_thresholds();
    REQUIRE(thresholds.size() == 10);
    CHECK(average_recall({0.6, 0.9}, thresholds) == Catch::Approx(0.6));
    CHECK(average_recall({1.0, 1.0, 1.0}, thresholds) == 1.0);
    CHECK(average_recall({0.0, 0.0}, thresholds) == 0.0);
    CHECK_THROWS_AS(average_recall({0.5}, {}), validation_error);
    CHECK_THROWS_AS(average_recall({0.5}, {1.5}), validation_error);
}

TEST_CASE("hungarian solves simple assignments") {
    const auto simple = hungarian({{1.0, 2.0}, {2.0, 1.0}});
    CHECK(simple == std::vector<std::int32_t>{0, 1});

    const auto diag = hungarian({{0.1, 5.0, 5.0}, {5.0, 0.2, 5.0}, {5.0, 5.0, 0.3}});
    CHECK(diag == std::vector<std::int32_t>{0, 1, 2});

    CHECK_THROWS_AS(hungarian({{1.0, std::nan("")}}), validation_error);
    CHECK_THROWS_AS(hungarian({{1.0, 2.0}, {1.0}}), validation_error);
}

TEST_CASE("hungarian equals factorial brute force", "[property]") {
    Rng rng(881);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t rows = 1 + rng.next_below(6);
        const std::size_t cols = 1 + rng.next_below(6);
        std::vector<std::vector<double>> cost(rows, std::vector<double>(cols));
        for (auto& row : cost)
            for (double& c : row) c = rng.next_double() * 10.0 - 2.0;

        const auto fast = hungarian(cost);
        std::vector<std::int32_t> slow_rows;
        const double slow_total = brute_force_assignment(cost, slow_rows);

        double fast_total = 0.0;
        std::vector<bool> used(cols, false);
        for (std::size_t r = 0; r < rows; ++r) {
            if (fast[r] < 0) continue;
            REQUIRE_FALSE(used[fast[r]]);
            used[fast[r]] = true;
            fast_total += cost[r][fast[r]];
        }
        // Same optimal total (assignments may differ on ties).
        CHECK(fast_total == Catch::Approx(slow_total).margin(1e-9));
        // All rows assigned when rows <= cols; all columns used otherwise.
        const std::size_t assigned =
            static_cast<std::size_t>(std::count_if(fast.begin(), fast.end(),
                                                   [](std::int32_t c) { return c >= 0; }));
        CHECK(assigned == std::min(rows, cols));
    }
}

TEST_CASE("point-prompted evaluation") {
    const GridShape grid(6, 6);
    const SegmentMask g0 = rect_mask(grid, 0, 0, 2, 2);
    const SegmentMask g1 = rect_mask(grid, 3, 3, 2, 2);
    const auto thresholds = default_iou_thresholds();

    SECTION("perfect predictions") {
        const auto report = eval_point_prompted({g0, g1}, {g0, g1}, thresholds);
        CHECK(report.average_recall == 1.0);
        CHECK(report.mean_iou == 1.0);
    }
    SECTION("all-empty predictions") {
        const auto report = eval_point_prompted(
            {make_empty_mask(grid), make_empty_mask(grid)}, {g0, g1}, thresholds);
        CHECK(report.average_recall == 0.0);
        CHECK(report.mean_iou == 0.0);
    }
    SECTION("hand-computed pair with IoUs 0.6 and 0.9") {
        // 0.6: |a n b| = 3, |a u b| = 5 against the 2x2 gt.
        const SegmentMask p0 = mask_of(grid, {0, 1, 6, 8});
        REQUIRE(iou(p0, g0) == Catch::Approx(0.6));
        // 0.9: a 9-cell gt contained in a 10-cell prediction.
        const SegmentMask g2 = rect_mask(grid, 0, 3, 3, 3);
        SegmentMask p2 = g2;
        p2.inside[grid.at(3, 3)] = 1;
        REQUIRE(iou(p2, g2) == Catch::Approx(0.9));

        const auto report = eval_point_prompted({p0, p2}, {g0, g2}, thresholds);
        CHECK(report.mean_iou == Catch::Approx(0.75));
        CHECK(report.average_recall == Catch::Approx(0.6));
    }
    CHECK_THROWS_AS(eval_point_prompted({g0}, {g0, g1}, thresholds), validation_error);
}

TEST_CASE("auto evaluation on the hand-computed cases") {
    const GridShape grid(6, 6);
    const SegmentMask g0 = rect_mask(grid, 0, 0, 2, 2);
    const SegmentMask g1 = rect_mask(grid, 3, 3, 2, 2);
    const auto thresholds = default_iou_thresholds();

    SECTION("identical sets score 1 everywhere") {
        const auto report = eval_auto({g0, g1}, {g0, g1}, thresholds);
        CHECK(report.average_precision.value() == 1.0);
        CHECK(report.average_recall == 1.0);
        CHECK(report.f1.value() == 1.0);
        CHECK(report.mean_iou == 1.0);
    }

    SECTION("2 GT, 1 perfect prediction") {
        const auto report = eval_auto({g0}, {g0, g1}, thresholds);
        CHECK(report.average_precision.value() == 1.0);
        CHECK(report.average_recall == 0.5);
        CHECK(report.f1.value() == Catch::Approx(2.0 / 3.0));
        CHECK(report.mean_iou == 0.5);
    }

    SECTION("no predictions at all") {
        const auto report = eval_auto({}, {g0, g1}, thresholds);
        CHECK(report.degenerate);
        CHECK(report.average_precision.value() == 0.0);
        CHECK(report.average_recall == 0.0);
        CHECK(report.mean_iou == 0.0);
    }

    SECTION("invariant under permutation of both lists") {
        const SegmentMask p0 = mask_of(grid, {0, 1, 6});        // overlaps g0
        const SegmentMask p1 = rect_mask(grid, 3, 3, 2, 3);     // overlaps g1
        const auto a = eval_auto({p0, p1}, {g0, g1}, thresholds);
        const auto b = eval_auto({p1, p0}, {g1, g0}, thresholds);
        CHECK(a.average_precision.value() == Catch::Approx(b.average_precision.value()));
        CHECK(a.average_recall == Catch::Approx(b.average_recall));
        CHECK(a.mean_iou == Catch::Approx(b.mean_iou));
    }

    SECTION("AP and AR are monotone non-increasing in the threshold shift") {
        const SegmentMask p0 = mask_of(grid, {0, 1, 6});  // IoU 0.6 with g0... (3/5)
        std::vector<double> low{0.3, 0.35, 0.4}, high{0.7, 0.75, 0.8};
        const auto at_low = eval_auto({p0}, {g0}, low);
        const auto at_high = eval_auto({p0}, {g0}, high);
        CHECK(at_low.average_recall >= at_high.average_recall);
        CHECK(at_low.average_precision.value() >= at_high.average_precision.value());
    }
}
