#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdrive/map.hpp"
#include "qdrive/world.hpp"

namespace qdrive {

struct CameraConfig {
    double fov = 40.0;           // horizontal, degrees
    int width = 128;
    int height = 96;
    double mount_height = 1.5;   // m above ground
    double forward_offset = 2.0; // m ahead of the vehicle centre
    double d_max = 1000.0;       // depth sentinel, m

    void validate() const;
};

template <class T>
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Frame() = default;
    Frame(int w, int h, T fill) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    T& at(int col, int row) { return data[static_cast<std::size_t>(row) * width + col]; }
    const T& at(int col, int row) const { return data[static_cast<std::size_t>(row) * width + col]; }
    bool operator==(const Frame&) const = default;
};

using SegFrame = Frame<SegClass>;
using DepthFrame = Frame<double>;

struct RenderedFrames {
    SegFrame seg;
    DepthFrame depth;
};

// column = a*row^2 + b*row + c in pixel coordinates.
struct LanePoly {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double column_at(double row) const { return (a * row + b) * row + c; }
};

struct LaneFit {
    LanePoly poly;
    double rms = 0.0;
    std::size_t pixels = 0;
};

struct PixelPoint {
    double col = 0.0;
    double row = 0.0;
};

class PerceptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Synthetic segmentation + depth camera at the ego's front. Ground pixels are
// classified by inverse perspective into the map raster; actors are upright
// billboards at their nearest footprint depth. Rows run in parallel.
RenderedFrames render_frames(const World& world, const CameraConfig& camera);
// Same pixels, single-threaded; kept as the reference for render_frames.
RenderedFrames render_frames_reference(const World& world, const CameraConfig& camera);

LaneFit fit_quadratic(std::span<const PixelPoint> points);
// Least-squares fit of column on row over the lane-marking pixels.
LaneFit fit_lane_polynomial(const SegFrame& seg);

// Pixels strictly left of the curve become SegClass::None.
SegFrame mask_opposite_lane(const SegFrame& seg, const LanePoly& poly);

// Mean depth over the vehicle mask and over the pedestrian mask; the smaller
// of the two, or d_max when neither class is present.
double estimate_obstacle_distance(const SegFrame& seg, const DepthFrame& depth, double d_max);

// Ground truth: distance from the camera to the nearest footprint point of any
// actor in the horizontal frustum and in the ego's travel-direction lane.
double oracle_obstacle_distance(const World& world, const CameraConfig& camera);

// Carries the last accepted lane fit between frames.
struct PipelineState {
    std::optional<LanePoly> last_fit;
    double max_fit_rms = 4.0;
    std::size_t min_fit_pixels = 8;
};

// Render -> fit (falling back to the previous fit) -> mask -> estimate.
double pipeline_obstacle_distance(const World& world, const CameraConfig& camera, PipelineState& state);

}  // namespace qdrive
