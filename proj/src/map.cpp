#include "qdrive/map.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace qdrive {

using nlohmann::json;

Box Crosswalk::box() const {
    const Vec2 u = axis();
    return {center(), rad2deg(std::atan2(u.y, u.x)), length() / 2.0, width / 2.0};
}

double Lane::yaw() const {
    const Vec2 d = direction();
    return rad2deg(std::atan2(d.y, d.x));
}

SurfaceRaster::SurfaceRaster(double x0, double y0, double resolution, int cols, int rows,
                             std::vector<SegClass> cells)
    : x0_(x0), y0_(y0), res_(resolution), inv_res_(1.0 / resolution), cols_(cols), rows_(rows),
      cells_(std::move(cells)) {}

namespace {

Vec2 read_vec(const json& j) {
    if (!j.is_array() || j.size() != 2) throw MapError("expected [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Vec2> read_points(const json& j) {
    std::vector<Vec2> out;
    for (const auto& p : j) out.push_back(read_vec(p));
    return out;
}

}  // namespace

Map Map::from_json_text(const std::string& text) {
    Map m;
    try {
        const json doc = json::parse(text);
        if (doc.at("schema_version").get<int>() != 1) throw MapError("unsupported map schema_version");
        m.name_ = doc.at("name").get<std::string>();
        m.lane_half_width_ = doc.at("lane_half_width").get<double>();
        const auto& b = doc.at("bounds");
        if (b.size() != 4) throw MapError("bounds must have four entries");
        for (int i = 0; i < 4; ++i) m.bounds_[i] = b[i].get<double>();

        for (const auto& r : doc.at("roads")) {
            Road road{r.at("id").get<std::string>(), read_points(r.at("centerline")),
                      r.value("half_width", 2.0 * m.lane_half_width_)};
            if (road.half_width < 2.0 * m.lane_half_width_) throw MapError("road narrower than its two lanes");
            if (road.centerline.size() < 2) throw MapError("road centerline needs two points");
            m.roads_.push_back(std::move(road));
        }
        for (const auto& jn : doc.at("junctions")) {
            m.junctions_.push_back({jn.at("id").get<std::string>(), read_points(jn.at("polygon"))});
        }
        for (const auto& s : doc.at("sidewalks")) m.sidewalks_.push_back({read_points(s.at("polygon"))});
        for (const auto& c : doc.at("crosswalks")) {
            m.crosswalks_.push_back({c.at("id").get<std::string>(), read_vec(c.at("a")), read_vec(c.at("b")),
                                     c.at("width").get<double>(), c.at("sidewalk_depth").get<double>()});
        }
        for (const auto& l : doc.at("lights")) {
            const double red = l.at("red").get<double>();
            const double green = l.at("green").get<double>();
            if (red <= 0.0 || green <= 0.0) throw MapError("light durations must be positive");
            m.lights_.push_back({l.at("id").get<std::string>(), read_vec(l.at("position")),
                                 l.at("facing_yaw").get<double>(), {red, green, l.at("offset").get<double>()}});
        }
        for (const auto& l : doc.at("lanes")) {
            const auto pts = read_points(l.at("polyline"));
            if (pts.size() != 2) throw MapError("traffic lanes must be straight two-point polylines");
            Lane lane{l.at("id").get<std::string>(), pts[0], pts[1], {}};
            for (const auto& s : l.at("stop_lines")) {
                const auto id = s.at("light").get<std::string>();
                std::size_t idx = m.lights_.size();
                for (std::size_t i = 0; i < m.lights_.size(); ++i) {
                    if (m.lights_[i].id == id) idx = i;
                }
                if (idx == m.lights_.size()) throw MapError("stop line references unknown light " + id);
                lane.stop_lines.push_back({s.at("s").get<double>(), idx});
            }
            m.lanes_.push_back(std::move(lane));
        }
        for (const auto& t : doc.at("trajectories")) {
            NamedRoute route{t.at("name").get<std::string>(), {}, t.value("eval", false)};
            for (const auto& p : t.at("poses")) {
                if (p.size() != 3) throw MapError("trajectory poses are [x, y, yaw]");
                route.poses.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
            }
            if (route.poses.size() < 2) throw MapError("trajectory needs two poses");
            m.routes_.push_back(std::move(route));
        }
    } catch (const json::exception& e) {
        throw MapError(std::string("malformed map: ") + e.what());
    }
    return m;
}

Map Map::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MapError("cannot open map file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

Map Map::straight_road(double length, double lane_half_width, double shoulder) {
    Map m;
    m.name_ = "straight_road";
    m.lane_half_width_ = lane_half_width;
    const double hw = 2.0 * lane_half_width + shoulder;
    const double walk = 2.5;
    m.bounds_[0] = -10.0;
    m.bounds_[1] = -hw - walk - 10.0;
    m.bounds_[2] = length + 10.0;
    m.bounds_[3] = hw + walk + 10.0;
    m.roads_.push_back({"road", {{0.0, 0.0}, {length, 0.0}}, hw});
    m.sidewalks_.push_back({{{0.0, hw}, {length, hw}, {length, hw + walk}, {0.0, hw + walk}}});
    m.sidewalks_.push_back({{{0.0, -hw - walk}, {length, -hw - walk}, {length, -hw}, {0.0, -hw}}});
    m.lanes_.push_back({"eb", {0.0, -lane_half_width}, {length, -lane_half_width}, {}});
    m.lanes_.push_back({"wb", {length, lane_half_width}, {0.0, lane_half_width}, {}});
    m.routes_.push_back({"straight", {{5.0, -lane_half_width, 0.0}, {length - 5.0, -lane_half_width, 0.0}}, false});
    return m;
}

const NamedRoute& Map::route(const std::string& name) const {
    for (const auto& r : routes_) {
        if (r.name == name) return r;
    }
    throw MapError("unknown trajectory " + name);
}

bool Map::in_junction(Vec2 p) const {
    for (const auto& j : junctions_) {
        if (point_in_polygon(j.polygon, p)) return true;
    }
    return false;
}

namespace {

// Distance from p to a road centreline, with the segment direction at the
// closest point. Returns +inf when p projects beyond the road ends.
double road_distance(const Road& road, Vec2 p, Vec2* closest, Vec2* dir) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < road.centerline.size(); ++i) {
        const Segment seg{road.centerline[i], road.centerline[i + 1]};
        double t = 0.0;
        const Vec2 c = closest_point(seg, p, &t);
        const bool cap = (t <= 0.0 && i == 0) || (t >= 1.0 && i + 2 == road.centerline.size());
        if (cap) continue;
        const double d = norm(p - c);
        if (d < best) {
            best = d;
            if (closest) *closest = c;
            if (dir) *dir = (seg.b - seg.a) * (1.0 / norm(seg.b - seg.a));
        }
    }
    return best;
}

}  // namespace

bool Map::is_drivable(Vec2 p) const {
    if (in_junction(p)) return true;
    for (const auto& r : roads_) {
        if (road_distance(r, p, nullptr, nullptr) <= r.half_width) return true;
    }
    return false;
}

SegClass Map::classify(Vec2 p) const {
    if (in_junction(p)) return SegClass::Road;
    double best = std::numeric_limits<double>::infinity();
    double hw = 0.0;
    for (const auto& r : roads_) {
        const double d = road_distance(r, p, nullptr, nullptr);
        if (d < best) {
            best = d;
            hw = r.half_width;
        }
    }
    if (best <= kMarkingHalfWidth) return SegClass::LaneMarking;
    if (best <= hw) return SegClass::Road;
    for (const auto& s : sidewalks_) {
        if (point_in_polygon(s.polygon, p)) return SegClass::Sidewalk;
    }
    return SegClass::None;
}

bool Map::in_same_direction_lane(Vec2 q, Vec2 travel_dir) const {
    double best = std::numeric_limits<double>::infinity();
    Vec2 closest;
    Vec2 dir;
    double hw = 0.0;
    for (const auto& r : roads_) {
        Vec2 c, d;
        const double dist = road_distance(r, q, &c, &d);
        if (dist < best) {
            best = dist;
            closest = c;
            dir = d;
            hw = r.half_width;
        }
    }
    if (!std::isfinite(best) || best > hw) return false;
    if (dot(dir, travel_dir) < 0.0) dir = dir * -1.0;
    const double right = -cross(dir, q - closest);
    return right >= 0.0 && right <= hw;
}

void Map::build_raster(double resolution) {
    const double x0 = bounds_[0];
    const double y0 = bounds_[1];
    const int cols = static_cast<int>(std::ceil((bounds_[2] - x0) / resolution));
    const int rows = static_cast<int>(std::ceil((bounds_[3] - y0) / resolution));
    std::vector<SegClass> cells(static_cast<std::size_t>(cols) * rows);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Vec2 p{x0 + (c + 0.5) * resolution, y0 + (r + 0.5) * resolution};
            cells[static_cast<std::size_t>(r) * cols + c] = classify(p);
        }
    }
    raster_ = SurfaceRaster(x0, y0, resolution, cols, rows, std::move(cells));
}

MapPtr load_map(const std::filesystem::path& path) {
    auto m = std::make_shared<Map>(Map::load(path));
    m->build_raster();
    return m;
}

}  // namespace qdrive
