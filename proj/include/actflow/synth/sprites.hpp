#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/core/video.hpp"
#include "actflow/synth/trajectory.hpp"

namespace actflow::synth {

enum class SpriteShape { square, circle, triangle, star };

inline std::string to_string(SpriteShape s) {
    switch (s) {
        case SpriteShape::square: return "square";
        case SpriteShape::circle: return "circle";
        case SpriteShape::triangle: return "triangle";
        case SpriteShape::star: return "star";
    }
    throw ConfigError("invalid sprite shape value");
}

inline SpriteShape sprite_shape_from_string(const std::string& s) {
    if (s == "square") return SpriteShape::square;
    if (s == "circle") return SpriteShape::circle;
    if (s == "triangle") return SpriteShape::triangle;
    if (s == "star") return SpriteShape::star;
    throw ConfigError("unknown sprite shape: " + s);
}

struct SpriteScene {
    SpriteShape shape = SpriteShape::circle;
    std::array<double, 3> color = {0.85, 0.12, 0.12};
    double size = 10.0;  // full extent in pixels
    std::array<double, 3> background = {0.15, 0.15, 0.15};
};

namespace detail {

// Point-in-shape tests in unit coordinates (shape spans [-1, 1]).
// All shapes have their area centroid at the origin.
inline bool in_unit_square(double u, double v) {
    return std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
}

inline bool in_unit_circle(double u, double v) { return u * u + v * v <= 1.0; }

inline bool in_unit_triangle(double u, double v) {
    // equilateral triangle, vertices at angles 90/210/330 deg, circumradius 1;
    // area centroid is the origin. y axis points down in pixel space, so flip v.
    const double x = u, y = -v;
    const double r3 = std::sqrt(3.0);
    // edges: y <= 1 - ... derive half-planes from vertices
    // v0=(0,1), v1=(-r3/2,-1/2), v2=(r3/2,-1/2)
    const double e0 = (y + 0.5);                       // below edge v1-v2 is outside
    const double e1 = (-r3 * (x) - (y) + 1.0) / 2.0;   // edge v0-v1
    const double e2 = (r3 * (x) - (y) + 1.0) / 2.0;    // edge v0-v2
    return e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0;
}

inline bool in_unit_star(double u, double v) {
    // five-point star, outer radius 1, inner radius 0.45, one tip up;
    // symmetric about the origin's vertical axis, centroid at origin.
    const double x = u, y = -v;
    static const int kPoints = 5;
    static const double kInner = 0.45;
    double vx[2 * kPoints], vy[2 * kPoints];
    for (int i = 0; i < 2 * kPoints; ++i) {
        const double r = (i % 2 == 0) ? 1.0 : kInner;
        const double a = M_PI / 2.0 + M_PI * static_cast<double>(i) / kPoints;
        vx[i] = r * std::cos(a);
        vy[i] = r * std::sin(a);
    }
    // even-odd rule
    bool inside = false;
    for (int i = 0, j = 2 * kPoints - 1; i < 2 * kPoints; j = i++) {
        const bool cross = ((vy[i] > y) != (vy[j] > y)) &&
                           (x < (vx[j] - vx[i]) * (y - vy[i]) / (vy[j] - vy[i]) + vx[i]);
        if (cross) inside = !inside;
    }
    return inside;
}

inline bool point_in_sprite(SpriteShape shape, double u, double v) {
    switch (shape) {
        case SpriteShape::square: return in_unit_square(u, v);
        case SpriteShape::circle: return in_unit_circle(u, v);
        case SpriteShape::triangle: return in_unit_triangle(u, v);
        case SpriteShape::star: return in_unit_star(u, v);
    }
    throw ConfigError("invalid sprite shape value");
}

}  // namespace detail

// Anti-aliased coverage of one pixel (integer center coordinates) by the
// sprite at pose `p`, via 2x supersampling (4 sample points per pixel).
inline double pixel_coverage(const SpriteScene& scene, const SpritePose& p,
                             int64_t px, int64_t py) {
    const double half = scene.size / 2.0;
    static const double kOff[2] = {-0.25, 0.25};
    int hits = 0;
    for (double oy : kOff)
        for (double ox : kOff) {
            const double u = (static_cast<double>(px) + ox - p.x) / half;
            const double v = (static_cast<double>(py) + oy - p.y) / (half * p.height_scale);
            if (detail::point_in_sprite(scene.shape, u, v)) ++hits;
        }
    return static_cast<double>(hits) / 4.0;
}

// Per-frame sprite coverage masks in [0, 1], same resolution as the render.
inline std::vector<std::vector<double>> render_coverage(
    const SpriteScene& scene, const std::vector<SpritePose>& traj,
    int64_t height, int64_t width) {
    std::vector<std::vector<double>> masks;
    masks.reserve(traj.size());
    for (const SpritePose& p : traj) {
        std::vector<double> m(static_cast<size_t>(height * width), 0.0);
        const double half = scene.size / 2.0;
        const int64_t y0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(p.y - half - 1)));
        const int64_t y1 = std::min<int64_t>(height - 1, static_cast<int64_t>(std::ceil(p.y + half + 1)));
        const int64_t x0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(p.x - half - 1)));
        const int64_t x1 = std::min<int64_t>(width - 1, static_cast<int64_t>(std::ceil(p.x + half + 1)));
        for (int64_t y = y0; y <= y1; ++y)
            for (int64_t x = x0; x <= x1; ++x)
                m[static_cast<size_t>(y * width + x)] = pixel_coverage(scene, p, x, y);
        masks.push_back(std::move(m));
    }
    return masks;
}

// Rasterize the sprite over a uniform background along the trajectory.
// Deterministic; errors if any pose puts the sprite outside the frame.
inline VideoTensor render_video(const SpriteScene& scene,
                                const std::vector<SpritePose>& traj,
                                int64_t height, int64_t width) {
    if (traj.empty()) {
        throw ContractError("empty trajectory");
    }
    if (scene.size <= 0.0 || scene.size > static_cast<double>(std::min(height, width))) {
        throw RenderError("sprite size does not fit the frame");
    }
    const double half = scene.size / 2.0;
    for (const SpritePose& p : traj) {
        if (p.x - half < -0.5 || p.x + half > static_cast<double>(width) - 0.5 ||
            p.y - half * p.height_scale < -0.5 ||
            p.y + half * p.height_scale > static_cast<double>(height) - 0.5) {
            throw RenderError("sprite out of bounds at (" + std::to_string(p.x) +
                              ", " + std::to_string(p.y) + ")");
        }
    }
    VideoTensor v(static_cast<int64_t>(traj.size()), height, width);
    auto masks = render_coverage(scene, traj, height, width);
    for (size_t t = 0; t < traj.size(); ++t)
        for (int64_t y = 0; y < height; ++y)
            for (int64_t x = 0; x < width; ++x) {
                const double cov = masks[t][static_cast<size_t>(y * width + x)];
                for (int c = 0; c < 3; ++c) {
                    v.at(static_cast<int64_t>(t), y, x, c) =
                        scene.background[static_cast<size_t>(c)] +
                        cov * (scene.color[static_cast<size_t>(c)] -
                               scene.background[static_cast<size_t>(c)]);
                }
            }
    return v;
}

}  // namespace actflow::synth
