#include "qdrive/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qdrive {

double Trajectory::length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        len += norm(waypoints[i].pos() - waypoints[i - 1].pos());
    }
    return len;
}

namespace {

Vec2 hermite(Vec2 p0, Vec2 m0, Vec2 p1, Vec2 m1, double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return p0 * h00 + m0 * h10 + p1 * h01 + m1 * h11;
}

std::vector<Vec2> densify(std::span<const Pose> route) {
    std::vector<Vec2> pts{{route[0].x, route[0].y}};
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        const Vec2 p0{route[i].x, route[i].y};
        const Vec2 p1{route[i + 1].x, route[i + 1].y};
        const double chord = norm(p1 - p0);
        if (chord == 0.0) continue;
        const Vec2 m0 = heading(route[i].yaw) * chord;
        const Vec2 m1 = heading(route[i + 1].yaw) * chord;
        const int n = std::max(16, static_cast<int>(std::ceil(chord / 0.02)));
        for (int k = 1; k <= n; ++k) {
            pts.push_back(hermite(p0, m0, p1, m1, static_cast<double>(k) / n));
        }
    }
    return pts;
}

}  // namespace

Trajectory build_trajectory(std::span<const Pose> route, double spacing) {
    if (route.size() < 2) throw TrajectoryError("route needs at least two control poses");
    if (!(spacing >= 0.5 && spacing <= 5.0)) throw TrajectoryError("spacing must lie in [0.5, 5] m");

    const std::vector<Vec2> dense = densify(route);
    std::vector<double> cum(dense.size(), 0.0);
    for (std::size_t i = 1; i < dense.size(); ++i) cum[i] = cum[i - 1] + norm(dense[i] - dense[i - 1]);
    const double total = cum.back();
    if (total < spacing) throw TrajectoryError("route is shorter than the waypoint spacing");

    const auto segments = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(total / spacing)));
    const double step = total / static_cast<double>(segments);

    std::vector<Vec2> pts;
    pts.reserve(segments + 1);
    std::size_t j = 0;
    for (std::size_t k = 0; k < segments; ++k) {
        const double s = step * static_cast<double>(k);
        while (j + 1 < cum.size() && cum[j + 1] < s) ++j;
        const double seg = cum[j + 1] - cum[j];
        const double t = seg > 0.0 ? (s - cum[j]) / seg : 0.0;
        pts.push_back(dense[j] + (dense[j + 1] - dense[j]) * t);
    }
    pts.push_back(dense.back());

    Trajectory traj;
    traj.waypoints.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 dir = i + 1 < pts.size() ? pts[i + 1] - pts[i] : pts[i] - pts[i - 1];
        traj.waypoints.push_back({pts[i].x, pts[i].y, wrap_deg(rad2deg(std::atan2(dir.y, dir.x))), i});
    }
    return traj;
}

std::size_t nearest_waypoint(const Trajectory& traj, Vec2 p) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.waypoints.size(); ++i) {
        const Vec2 r = traj.waypoints[i].pos() - p;
        const double d2 = dot(r, r);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

}  // namespace qdrive
