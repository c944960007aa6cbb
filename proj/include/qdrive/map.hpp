#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdrive/geometry.hpp"
#include "qdrive/trajectory.hpp"

namespace qdrive {

enum class SegClass : std::uint8_t { None = 0, Road, LaneMarking, Sidewalk, Vehicle, Pedestrian };

struct Road {
    std::string id;
    std::vector<Vec2> centerline;
    double half_width = 3.5;
};

struct Junction {
    std::string id;
    std::vector<Vec2> polygon;
};

struct SidewalkArea {
    std::vector<Vec2> polygon;
};

// a and b are the outer sidewalk edges on either side of the road.
struct Crosswalk {
    std::string id;
    Vec2 a;
    Vec2 b;
    double width = 4.0;
    double sidewalk_depth = 2.5;

    double length() const { return norm(b - a); }
    Vec2 axis() const { return (b - a) * (1.0 / length()); }
    Vec2 center() const { return (a + b) * 0.5; }
    Box box() const;
};

struct LightCycle {
    double red = 10.0;
    double green = 10.0;
    double offset = 0.0;
};

struct LightSpec {
    std::string id;
    Vec2 position;
    double facing_yaw = 0.0;  // travel direction of the approach it controls
    LightCycle cycle;
};

struct StopLine {
    double s = 0.0;
    std::size_t light = 0;
};

// Straight traffic lane from start to end.
struct Lane {
    std::string id;
    Vec2 start;
    Vec2 end;
    std::vector<StopLine> stop_lines;

    double length() const { return norm(end - start); }
    Vec2 direction() const { return (end - start) * (1.0 / length()); }
    double yaw() const;
    Vec2 point_at(double s) const { return start + direction() * s; }
};

struct NamedRoute {
    std::string name;
    std::vector<Pose> poses;
    bool eval = false;
};

class MapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ground classification rasterised once for fast per-pixel lookup.
class SurfaceRaster {
public:
    SurfaceRaster() = default;
    SurfaceRaster(double x0, double y0, double resolution, int cols, int rows, std::vector<SegClass> cells);

    SegClass at(Vec2 p) const {
        const double fx = (p.x - x0_) * inv_res_;
        const double fy = (p.y - y0_) * inv_res_;
        if (fx < 0.0 || fy < 0.0) return SegClass::None;
        const auto c = static_cast<int>(fx);
        const auto r = static_cast<int>(fy);
        if (c >= cols_ || r >= rows_) return SegClass::None;
        return cells_[static_cast<std::size_t>(r) * cols_ + c];
    }
    double resolution() const { return res_; }

private:
    double x0_ = 0.0, y0_ = 0.0, res_ = 1.0, inv_res_ = 1.0;
    int cols_ = 0, rows_ = 0;
    std::vector<SegClass> cells_;
};

class Map {
public:
    static constexpr double kMarkingHalfWidth = 0.15;

    static Map load(const std::filesystem::path& path);
    static Map from_json_text(const std::string& text);
    // A single straight two-lane road from (0,0) to (length,0) without junctions.
    static Map straight_road(double length, double lane_half_width = 1.75, double shoulder = 1.0);

    const std::string& name() const { return name_; }
    double lane_half_width() const { return lane_half_width_; }
    const std::vector<Road>& roads() const { return roads_; }
    const std::vector<Junction>& junctions() const { return junctions_; }
    const std::vector<SidewalkArea>& sidewalks() const { return sidewalks_; }
    const std::vector<Crosswalk>& crosswalks() const { return crosswalks_; }
    const std::vector<LightSpec>& lights() const { return lights_; }
    const std::vector<Lane>& lanes() const { return lanes_; }
    const std::vector<NamedRoute>& routes() const { return routes_; }
    const NamedRoute& route(const std::string& name) const;

    bool in_junction(Vec2 p) const;
    bool is_drivable(Vec2 p) const;
    // Exact ground classification: junction/road, centre marking, sidewalk, none.
    SegClass classify(Vec2 p) const;
    // True when q lies in the lane that carries traffic along travel_dir, i.e.
    // within one road half width to the right of the nearest road centreline.
    bool in_same_direction_lane(Vec2 q, Vec2 travel_dir) const;

    const SurfaceRaster& raster() const { return raster_; }
    void build_raster(double resolution = 0.1);

private:
    std::string name_;
    double lane_half_width_ = 1.75;
    double bounds_[4] = {0, 0, 0, 0};
    std::vector<Road> roads_;
    std::vector<Junction> junctions_;
    std::vector<SidewalkArea> sidewalks_;
    std::vector<Crosswalk> crosswalks_;
    std::vector<LightSpec> lights_;
    std::vector<Lane> lanes_;
    std::vector<NamedRoute> routes_;
    SurfaceRaster raster_;
};

using MapPtr = std::shared_ptr<const Map>;

// Loads and rasterises a map, ready to share between worlds.
MapPtr load_map(const std::filesystem::path& path);

}  // namespace qdrive
