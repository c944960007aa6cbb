#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace qdrive {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// z-component of the 3D cross product; positive when b is counter-clockwise of a.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Wraps an angle in degrees into (-180, 180].
inline double wrap_deg(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r <= -180.0) r += 360.0;
    if (r > 180.0) r -= 360.0;
    return r;
}

inline Vec2 heading(double yaw_deg) {
    const double r = deg2rad(yaw_deg);
    return {std::cos(r), std::sin(r)};
}

// Oriented rectangle: centre, yaw (degrees, CCW from +x), half extents.
struct Box {
    Vec2 center;
    double yaw = 0.0;
    double half_length = 0.0;
    double half_width = 0.0;

    std::array<Vec2, 4> corners() const;
    bool contains(Vec2 p) const;
};

// Separating-axis overlap test. Touching boxes count as overlapping.
bool boxes_overlap(const Box& a, const Box& b);

struct Segment {
    Vec2 a;
    Vec2 b;
};

// Closest point on segment to p, with the clamped parameter t in [0, 1].
Vec2 closest_point(const Segment& s, Vec2 p, double* t_out = nullptr);
double distance_to_segment(const Segment& s, Vec2 p);

// Even-odd rule; points on the boundary may fall either way.
bool point_in_polygon(std::span<const Vec2> poly, Vec2 p);

// Distance from p to the nearest point of box (0 when inside).
double distance_to_box(const Box& box, Vec2 p);

}  // namespace qdrive
