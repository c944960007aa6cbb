#include "qdrive/geometry.hpp"

#include <algorithm>
#include <limits>

namespace qdrive {

std::array<Vec2, 4> Box::corners() const {
    const Vec2 f = heading(yaw) * half_length;
    const Vec2 l = Vec2{-heading(yaw).y, heading(yaw).x} * half_width;
    return {center + f + l, center + f - l, center - f - l, center - f + l};
}

bool Box::contains(Vec2 p) const {
    const Vec2 f = heading(yaw);
    const Vec2 l{-f.y, f.x};
    const Vec2 r = p - center;
    return std::abs(dot(r, f)) <= half_length && std::abs(dot(r, l)) <= half_width;
}

namespace {

// Projection interval of a box onto a unit axis.
std::pair<double, double> project(const Box& b, Vec2 axis) {
    const Vec2 f = heading(b.yaw);
    const Vec2 l{-f.y, f.x};
    const double c = dot(b.center, axis);
    const double r = b.half_length * std::abs(dot(f, axis)) + b.half_width * std::abs(dot(l, axis));
    return {c - r, c + r};
}

}  // namespace

bool boxes_overlap(const Box& a, const Box& b) {
    const Vec2 fa = heading(a.yaw);
    const Vec2 fb = heading(b.yaw);
    const std::array<Vec2, 4> axes{fa, Vec2{-fa.y, fa.x}, fb, Vec2{-fb.y, fb.x}};
    for (const Vec2& axis : axes) {
        const auto [a0, a1] = project(a, axis);
        const auto [b0, b1] = project(b, axis);
        if (a1 < b0 || b1 < a0) return false;
    }
    return true;
}

Vec2 closest_point(const Segment& s, Vec2 p, double* t_out) {
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (t_out) *t_out = t;
    return s.a + d * t;
}

double distance_to_segment(const Segment& s, Vec2 p) { return norm(p - closest_point(s, p)); }

bool point_in_polygon(std::span<const Vec2> poly, Vec2 p) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

double distance_to_box(const Box& box, Vec2 p) {
    const Vec2 f = heading(box.yaw);
    const Vec2 l{-f.y, f.x};
    const Vec2 r = p - box.center;
    const double u = std::max(std::abs(dot(r, f)) - box.half_length, 0.0);
    const double v = std::max(std::abs(dot(r, l)) - box.half_width, 0.0);
    return std::hypot(u, v);
}

}  // namespace qdrive
