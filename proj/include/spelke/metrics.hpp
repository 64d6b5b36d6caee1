#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spelke/common.hpp"
#include "spelke/fields.hpp"

namespace spelke {

// |a n b| / |a u b|. Two empty masks have no meaningful overlap: the
// result is 0 and flagged degenerate (never counts as a detection).
struct IouResult {
    double value = 0.0;
    bool degenerate = false;
};

inline IouResult iou_checked(const SegmentMask& a, const SegmentMask& b) {
    if (!(a.grid == b.grid)) throw validation_error("IoU masks disagree on grid shape");
    std::uint64_t inter = 0, uni = 0;
    for (Location i = 0; i < a.grid.locations(); ++i) {
        const bool ia = a.contains(i), ib = b.contains(i);
        inter += (ia && ib) ? 1 : 0;
        uni += (ia || ib) ? 1 : 0;
    }
    if (uni == 0) return {0.0, true};
    return {static_cast<double>(inter) / static_cast<double>(uni), false};
}

inline double iou(const SegmentMask& a, const SegmentMask& b) { return iou_checked(a, b).value; }

// Prompt for a ground-truth mask: the integer-rounded centroid when it
// falls inside the mask, otherwise the in-mask location farthest from the
// nearest out-of-mask location (exact squared-distance transform, ties
// broken in row-major order).
inline Location point_prompt(const SegmentMask& gt) {
    if (gt.empty()) throw validation_error("cannot prompt an empty mask");
    const GridShape grid = gt.grid;
    double sum_r = 0.0, sum_c = 0.0;
    std::uint64_t count = 0;
    std::vector<Location> inside, outside;
    for (Location i = 0; i < grid.locations(); ++i) {
        if (gt.contains(i)) {
            sum_r += grid.row_of(i);
            sum_c += grid.col_of(i);
            ++count;
            inside.push_back(i);
        } else {
            outside.push_back(i);
        }
    }
    const auto rounded = [](double x) { return static_cast<std::int64_t>(std::llround(x)); };
    const std::int64_t cr = rounded(sum_r / count), cc = rounded(sum_c / count);
    if (cr >= 0 && cc >= 0 && cr < grid.height && cc < grid.width) {
        const Location centroid = grid.at(static_cast<std::uint32_t>(cr),
                                          static_cast<std::uint32_t>(cc));
        if (gt.contains(centroid)) return centroid;
    }
    Location best = inside.front();
    std::uint64_t best_d2 = 0;
    for (Location u : inside) {
        std::uint64_t d2 = std::numeric_limits<std::uint64_t>::max();
        const std::int64_t ur = grid.row_of(u), uc = grid.col_of(u);
        for (Location v : outside) {
            const std::int64_t dr = ur - grid.row_of(v), dc = uc - grid.col_of(v);
            const std::uint64_t d = static_cast<std::uint64_t>(dr * dr + dc * dc);
            if (d < d2) d2 = d;
        }
        if (d2 > best_d2) {
            best_d2 = d2;
            best = u;
        }
    }
    return best;
}

// Default detection thresholds: 0.50, 0.55, ..., 0.95.
inline std::vector<double> default_iou_thresholds() {
    std::vector<double> t;
    for (int k = 0; k < 10; ++k) t.push_back(0.50 + 0.05 * k);
    return t;
}

// Mean over thresholds of the fraction of IoUs at or above each one.
inline double average_recall(const std::vector<double>& ious,
                             const std::vector<double>& thresholds) {
    if (thresholds.empty()) throw validation_error("threshold list must be non-empty");
    for (double t : thresholds)
        if (!(t > 0.0 && t <= 1.0)) throw validation_error("thresholds must lie in (0, 1]");
    if (ious.empty()) return 0.0;
    double total = 0.0;
    for (double t : thresholds) {
        std::size_t detected = 0;
        for (double v : ious) detected += v >= t ? 1 : 0;
        total += static_cast<double>(detected) / static_cast<double>(ious.size());
    }
    return total / static_cast<double>(thresholds.size());
}

// ---------------------------------------------------------------------------
// Hungarian assignment

// Minimum-total-cost one-to-one assignment (Kuhn-Munkres with potentials,
// O(n^3)). Rectangular inputs are padded square internally; returns, per
// row, the assigned column or -1 for padded rows/columns.
inline std::vector<std::int32_t> hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t rows = cost.size();
    std::size_t cols = 0;
    for (const auto& row : cost) cols = std::max(cols, row.size());
    for (const auto& row : cost) {
        if (row.size() != cols) throw validation_error("cost matrix rows differ in length");
        for (double c : row)
            if (!std::isfinite(c)) throw validation_error("cost matrix entry not finite");
    }
    if (rows == 0 || cols == 0) return std::vector<std::int32_t>(rows, -1);

    const std::size_t n = std::max(rows, cols);
    const auto cost_at = [&](std::size_t i, std::size_t j) {
        return (i < rows && j < cols) ? cost[i][j] : 0.0;  // padding
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost_at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::int32_t> assignment(rows, -1);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = match[j];
        if (i >= 1 && i <= rows && j <= cols)
            assignment[i - 1] = static_cast<std::int32_t>(j - 1);
    }
    return assignment;
}

// ---------------------------------------------------------------------------
// Evaluation protocols

struct MatchResult {
    // (gt index, pred index, IoU of the pair)
    struct Pair {
        std::uint32_t gt = 0;
        std::uint32_t pred = 0;
        double iou = 0.0;
    };
    std::vector<Pair> pairs;
    std::vector<std::uint32_t> unmatched_gt;
    std::vector<std::uint32_t> unmatched_pred;
};

// Best one-to-one matching between predictions and ground truth,
// maximizing total IoU via min-cost assignment on 1 - IoU.
inline MatchResult match_segments(const std::vector<SegmentMask>& preds,
                                  const std::vector<SegmentMask>& gts) {
    MatchResult result;
    if (preds.empty() || gts.empty()) {
        for (std::uint32_t g = 0; g < gts.size(); ++g) result.unmatched_gt.push_back(g);
        for (std::uint32_t p = 0; p < preds.size(); ++p) result.unmatched_pred.push_back(p);
        return result;
    }
    std::vector<std::vector<double>> cost(gts.size(), std::vector<double>(preds.size()));
    std::vector<std::vector<double>> overlap(gts.size(), std::vector<double>(preds.size()));
    for (std::size_t g = 0; g < gts.size(); ++g) {
        for (std::size_t p = 0; p < preds.size(); ++p) {
            overlap[g][p] = iou(gts[g], preds[p]);
            cost[g][p] = 1.0 - overlap[g][p];
        }
    }
    const auto assignment = hungarian(cost);
    std::vector<bool> pred_used(preds.size(), false);
    for (std::uint32_t g = 0; g < gts.size(); ++g) {
        const std::int32_t p = assignment[g];
        if (p >= 0) {
            result.pairs.push_back({g, static_cast<std::uint32_t>(p), overlap[g][p]});
            pred_used[p] = true;
        } else {
            result.unmatched_gt.push_back(g);
        }
    }
    for (std::uint32_t p = 0; p < preds.size(); ++p)
        if (!pred_used[p]) result.unmatched_pred.push_back(p);
    return result;
}

struct MetricsReport {
    std::string mode;  // "point" or "auto"
    double average_recall = 0.0;
    double mean_iou = 0.0;
    std::optional<double> average_precision;  // auto mode
    std::optional<double> f1;                 // auto mode
    std::vector<double> thresholds;
    std::vector<double> per_pair_iou;  // point: per prompt; auto: per matched pair
    bool degenerate = false;           // empty prediction or GT sets were involved
};

// Point-prompted protocol: predictions are aligned one-to-one with the
// ground-truth masks that prompted them.
inline MetricsReport eval_point_prompted(const std::vector<SegmentMask>& preds,
                                         const std::vector<SegmentMask>& gts,
                                         const std::vector<double>& thresholds) {
    if (preds.size() != gts.size())
        throw validation_error("point-prompted eval needs aligned pred/gt lists");
    MetricsReport report;
    report.mode = "point";
    report.thresholds = thresholds;
    if (gts.empty()) {
        report.degenerate = true;
        return report;
    }
    for (std::size_t i = 0; i < preds.size(); ++i)
        report.per_pair_iou.push_back(iou(preds[i], gts[i]));
    double sum = 0.0;
    for (double v : report.per_pair_iou) sum += v;
    report.mean_iou = sum / static_cast<double>(report.per_pair_iou.size());
    report.average_recall = average_recall(report.per_pair_iou, thresholds);
    return report;
}

// One evaluation image: an unaligned prediction set against a GT set.
struct SegmentSetPair {
    std::vector<SegmentMask> preds;
    std::vector<SegmentMask> gts;
};

// Automatic-discovery protocol over a pooled collection of images:
// Hungarian matching per image, then threshold-averaged precision/recall
// over the pooled counts, their harmonic mean, and mIoU with unmatched
// ground truth scored 0.
inline MetricsReport eval_auto_pooled(const std::vector<SegmentSetPair>& images,
                                      const std::vector<double>& thresholds) {
    if (thresholds.empty()) throw validation_error("threshold list must be non-empty");
    MetricsReport report;
    report.mode = "auto";
    report.thresholds = thresholds;

    std::size_t total_preds = 0, total_gts = 0;
    std::vector<double> matched_ious;
    for (const auto& image : images) {
        total_preds += image.preds.size();
        total_gts += image.gts.size();
        const MatchResult match = match_segments(image.preds, image.gts);
        for (const auto& pair : match.pairs) matched_ious.push_back(pair.iou);
    }
    report.per_pair_iou = matched_ious;
    if (total_preds == 0 || total_gts == 0) report.degenerate = true;

    double ap = 0.0, ar = 0.0;
    for (double tau : thresholds) {
        std::size_t detected = 0;
        for (double v : matched_ious) detected += v >= tau ? 1 : 0;
        if (total_preds > 0) ap += static_cast<double>(detected) / static_cast<double>(total_preds);
        if (total_gts > 0) ar += static_cast<double>(detected) / static_cast<double>(total_gts);
    }
    ap /= static_cast<double>(thresholds.size());
    ar /= static_cast<double>(thresholds.size());
    report.average_precision = ap;
    report.average_recall = ar;
    report.f1 = (ap + ar) > 0.0 ? 2.0 * ap * ar / (ap + ar) : 0.0;

    double iou_sum = 0.0;
    for (double v : matched_ious) iou_sum += v;
    report.mean_iou = total_gts == 0 ? 0.0 : iou_sum / static_cast<double>(total_gts);
    return report;
}

inline MetricsReport eval_auto(const std::vector<SegmentMask>& preds,
                               const std::vector<SegmentMask>& gts,
                               const std::vector<double>& thresholds) {
    return eval_auto_pooled({SegmentSetPair{preds, gts}}, thresholds);
}

}  // namespace spelke
