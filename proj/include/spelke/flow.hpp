#pragma once

#include <cmath>

namespace spelke {

// 2D displacement in pixels. dx is horizontal (columns), dy vertical (rows).
struct FlowVector {
    double dx = 0.0;
    double dy = 0.0;

    double norm() const { return std::hypot(dx, dy); }
    bool finite() const { return std::isfinite(dx) && std::isfinite(dy); }

    FlowVector operator+(const FlowVector& o) const { return {dx + o.dx, dy + o.dy}; }
    FlowVector operator-(const FlowVector& o) const { return {dx - o.dx, dy - o.dy}; }
    FlowVector operator*(double s) const { return {dx * s, dy * s}; }
    bool operator==(const FlowVector&) const = default;
};

inline double dot(const FlowVector& a, const FlowVector& b) {
    return a.dx * b.dx + a.dy * b.dy;
}

}  // namespace spelke
