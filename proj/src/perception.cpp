#include "qdrive/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>

namespace qdrive {

void CameraConfig::validate() const {
    if (!(fov > 10.0 && fov < 120.0)) throw PerceptionError("camera fov must lie in (10, 120) degrees");
    if (width < 16 || height < 16) throw PerceptionError("camera frame must be at least 16x16");
    if (!(d_max > 0.0) || !(mount_height > 0.0)) throw PerceptionError("camera d_max and mount height must be positive");
}

namespace {

struct Billboard {
    double z_near = 0.0;
    double tan_min = 0.0;
    double tan_max = 0.0;
    double height = 0.0;
    SegClass cls = SegClass::Vehicle;
};

struct CameraFrame {
    Vec2 origin;
    Vec2 forward;
    Vec2 right;
    double tan_half_h = 0.0;
    double tan_half_v = 0.0;
};

constexpr double kNearPlane = 0.05;

CameraFrame camera_frame(const VehicleState& ego, const CameraConfig& cam) {
    CameraFrame f;
    f.forward = heading(ego.yaw);
    f.right = {f.forward.y, -f.forward.x};
    f.origin = ego.pos() + f.forward * cam.forward_offset;
    f.tan_half_h = std::tan(deg2rad(cam.fov / 2.0));
    f.tan_half_v = f.tan_half_h * cam.height / cam.width;
    return f;
}

std::optional<Billboard> billboard_for(const Actor& a, const CameraFrame& f, const CameraConfig& cam) {
    double z_near = std::numeric_limits<double>::infinity();
    double t_min = std::numeric_limits<double>::infinity();
    double t_max = -std::numeric_limits<double>::infinity();
    bool any_front = false;
    for (const Vec2& c : a.pose.box().corners()) {
        const Vec2 r = c - f.origin;
        const double z = dot(r, f.forward);
        const double x = dot(r, f.right);
        if (z > kNearPlane) {
            any_front = true;
            z_near = std::min(z_near, z);
            t_min = std::min(t_min, x / z);
            t_max = std::max(t_max, x / z);
        } else if (x > 0.0) {
            t_max = std::numeric_limits<double>::infinity();
        } else {
            t_min = -std::numeric_limits<double>::infinity();
        }
    }
    if (!any_front) return std::nullopt;
    // Straddling the near plane: the billboard sits at the plane.
    for (const Vec2& c : a.pose.box().corners()) z_near = std::min(z_near, dot(c - f.origin, f.forward));
    z_near = std::max(kNearPlane, z_near);
    if (t_max < -f.tan_half_h || t_min > f.tan_half_h) return std::nullopt;
    if (z_near > cam.d_max) return std::nullopt;
    return Billboard{z_near, t_min, t_max, a.height,
                     a.kind == ActorKind::Vehicle ? SegClass::Vehicle : SegClass::Pedestrian};
}

struct RenderSetup {
    CameraFrame frame;
    std::vector<Billboard> billboards;
    const SurfaceRaster* raster = nullptr;
};

RenderSetup prepare(const World& world, const CameraConfig& cam) {
    cam.validate();
    RenderSetup s;
    s.frame = camera_frame(world.ego, cam);
    s.raster = &world.map().raster();
    for (const Actor& a : world.actors) {
        if (auto bb = billboard_for(a, s.frame, cam)) s.billboards.push_back(*bb);
    }
    return s;
}

inline void render_pixel(const RenderSetup& s, const CameraConfig& cam, int col, int row, SegClass& cls_out,
                         double& depth_out) {
    const CameraFrame& f = s.frame;
    const double th = (2.0 * (col + 0.5) / cam.width - 1.0) * f.tan_half_h;
    const double tv = (1.0 - 2.0 * (row + 0.5) / cam.height) * f.tan_half_v;
    const double k = std::sqrt(1.0 + th * th + tv * tv);

    SegClass cls = SegClass::None;
    double best = cam.d_max;
    if (tv < 0.0) {
        const double zg = cam.mount_height / -tv;
        const double dg = zg * k;
        if (dg <= cam.d_max) {
            best = dg;
            cls = s.raster->at(f.origin + f.forward * zg + f.right * (th * zg));
        }
    }
    for (const Billboard& bb : s.billboards) {
        if (th < bb.tan_min || th > bb.tan_max) continue;
        const double y = tv * bb.z_near;
        if (y < -cam.mount_height || y > bb.height - cam.mount_height) continue;
        const double d = bb.z_near * k;
        if (d < best) {
            best = d;
            cls = bb.cls;
        }
    }
    cls_out = cls;
    depth_out = best;
}

}  // namespace

RenderedFrames render_frames(const World& world, const CameraConfig& camera) {
    const RenderSetup s = prepare(world, camera);
    RenderedFrames out{SegFrame(camera.width, camera.height, SegClass::None),
                       DepthFrame(camera.width, camera.height, camera.d_max)};
#pragma omp parallel for schedule(static)
    for (int row = 0; row < camera.height; ++row) {
        for (int col = 0; col < camera.width; ++col) {
            render_pixel(s, camera, col, row, out.seg.at(col, row), out.depth.at(col, row));
        }
    }
    return out;
}

RenderedFrames render_frames_reference(const World& world, const CameraConfig& camera) {
    const RenderSetup s = prepare(world, camera);
    RenderedFrames out{SegFrame(camera.width, camera.height, SegClass::None),
                       DepthFrame(camera.width, camera.height, camera.d_max)};
    for (int row = 0; row < camera.height; ++row) {
        for (int col = 0; col < camera.width; ++col) {
            render_pixel(s, camera, col, row, out.seg.at(col, row), out.depth.at(col, row));
        }
    }
    return out;
}

LaneFit fit_quadratic(std::span<const PixelPoint> points) {
    std::set<double> rows;
    for (const auto& p : points) rows.insert(p.row);
    if (points.size() < 3 || rows.size() < 3) {
        throw PerceptionError("lane fit needs at least 3 pixels on 3 distinct rows");
    }
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = points[static_cast<std::size_t>(i)].row;
        a(i, 0) = r * r;
        a(i, 1) = r;
        a(i, 2) = 1.0;
        b(i) = points[static_cast<std::size_t>(i)].col;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 3) throw PerceptionError("lane fit is rank deficient");
    const Eigen::Vector3d x = qr.solve(b);
    if (!x.allFinite()) throw PerceptionError("lane fit produced non-finite coefficients");
    const Eigen::VectorXd res = a * x - b;
    return {{x(0), x(1), x(2)}, std::sqrt(res.squaredNorm() / static_cast<double>(n)), points.size()};
}

LaneFit fit_lane_polynomial(const SegFrame& seg) {
    std::vector<PixelPoint> pts;
    for (int row = 0; row < seg.height; ++row) {
        for (int col = 0; col < seg.width; ++col) {
            if (seg.at(col, row) == SegClass::LaneMarking) pts.push_back({double(col), double(row)});
        }
    }
    return fit_quadratic(pts);
}

SegFrame mask_opposite_lane(const SegFrame& seg, const LanePoly& poly) {
    SegFrame out = seg;
    for (int row = 0; row < seg.height; ++row) {
        const double boundary = poly.column_at(row);
        for (int col = 0; col < seg.width; ++col) {
            if (col < boundary) out.at(col, row) = SegClass::None;
        }
    }
    return out;
}

double estimate_obstacle_distance(const SegFrame& seg, const DepthFrame& depth, double d_max) {
    if (seg.width != depth.width || seg.height != depth.height) {
        throw PerceptionError("segmentation and depth frames differ in size");
    }
    double sum_vehicle = 0.0, sum_ped = 0.0;
    std::size_t n_vehicle = 0, n_ped = 0;
    for (std::size_t i = 0; i < seg.data.size(); ++i) {
        if (seg.data[i] == SegClass::Vehicle) {
            sum_vehicle += depth.data[i];
            ++n_vehicle;
        } else if (seg.data[i] == SegClass::Pedestrian) {
            sum_ped += depth.data[i];
            ++n_ped;
        }
    }
    double d = d_max;
    if (n_vehicle > 0) d = std::min(d, sum_vehicle / static_cast<double>(n_vehicle));
    if (n_ped > 0) d = std::min(d, sum_ped / static_cast<double>(n_ped));
    return d;
}

double oracle_obstacle_distance(const World& world, const CameraConfig& camera) {
    camera.validate();
    const CameraFrame f = camera_frame(world.ego, camera);
    double best = camera.d_max;
    for (const Actor& a : world.actors) {
        if (!billboard_for(a, f, camera)) continue;
        if (!world.map().in_same_direction_lane(a.pose.pos(), f.forward)) continue;
        best = std::min(best, distance_to_box(a.pose.box(), f.origin));
    }
    return best;
}

double pipeline_obstacle_distance(const World& world, const CameraConfig& camera, PipelineState& state) {
    const RenderedFrames frames = render_frames(world, camera);
    std::optional<LanePoly> poly = state.last_fit;
    try {
        const LaneFit fit = fit_lane_polynomial(frames.seg);
        if (fit.rms <= state.max_fit_rms && fit.pixels >= state.min_fit_pixels) {
            poly = fit.poly;
            state.last_fit = fit.poly;
        }
    } catch (const PerceptionError&) {
        // keep the previous fit
    }
    const SegFrame masked = poly ? mask_opposite_lane(frames.seg, *poly) : frames.seg;
    return estimate_obstacle_distance(masked, frames.depth, camera.d_max);
}

}  // namespace qdrive
