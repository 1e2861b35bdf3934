#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "actflow/core/errors.hpp"

namespace actflow::synth {

enum class TrajectoryKind { bounce, zigzag, orbit, dash, squat_rise };

inline std::string to_string(TrajectoryKind k) {
    switch (k) {
        case TrajectoryKind::bounce: return "bounce";
        case TrajectoryKind::zigzag: return "zigzag";
        case TrajectoryKind::orbit: return "orbit";
        case TrajectoryKind::dash: return "dash";
        case TrajectoryKind::squat_rise: return "squat-rise";
    }
    throw ConfigError("invalid trajectory kind value");
}

inline TrajectoryKind trajectory_kind_from_string(const std::string& s) {
    if (s == "bounce") return TrajectoryKind::bounce;
    if (s == "zigzag") return TrajectoryKind::zigzag;
    if (s == "orbit") return TrajectoryKind::orbit;
    if (s == "dash") return TrajectoryKind::dash;
    if (s == "squat-rise") return TrajectoryKind::squat_rise;
    throw ConfigError("unknown trajectory kind: " + s);
}

struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::bounce;
    double amplitude = 0.25;   // fraction of frame size, [0, 1]
    double period = 8.0;       // frames
    double phase = 0.0;        // frames
    int64_t num_frames = 8;
};

// Per-frame sprite state. squat-rise is a non-translation action: position
// stays fixed and height_scale carries the motion; all other kinds keep
// height_scale = 1.
struct SpritePose {
    double x = 0.0;
    double y = 0.0;
    double height_scale = 1.0;
};

// Triangle wave with unit period: 0 -> +1 at u=1/4 -> -1 at u=3/4 -> 0.
inline double triangle_wave(double u) {
    double w = u - std::floor(u);
    if (w < 0.25) return 4.0 * w;
    if (w < 0.75) return 2.0 - 4.0 * w;
    return 4.0 * w - 4.0;
}

inline double smoothstep(double u) {
    u = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
    return u * u * (3.0 - 2.0 * u);
}

// Deterministic closed-form trajectory evaluation. Positions are pixel
// coordinates inside [0, W-1] x [0, H-1] for any amplitude in [0, 1].
inline std::vector<SpritePose> make_trajectory(const TrajectorySpec& spec,
                                               int64_t height, int64_t width) {
    if (spec.num_frames < 2) {
        throw ContractError("trajectory needs at least 2 frames");
    }
    if (spec.amplitude < 0.0 || spec.amplitude > 1.0) {
        throw ContractError("amplitude must lie in [0, 1]");
    }
    if (spec.period <= 0.0) {
        throw ConfigError("period must be positive");
    }
    const double cx = static_cast<double>(width - 1) / 2.0;
    const double cy = static_cast<double>(height - 1) / 2.0;
    const double ax = spec.amplitude * cx;
    const double ay = spec.amplitude * cy;

    std::vector<SpritePose> poses(static_cast<size_t>(spec.num_frames));
    for (int64_t i = 0; i < spec.num_frames; ++i) {
        const double ft = static_cast<double>(i) + spec.phase;
        SpritePose p{cx, cy, 1.0};
        switch (spec.kind) {
            case TrajectoryKind::bounce:
                p.y = cy - ay * std::abs(std::sin(M_PI * ft / spec.period));
                break;
            case TrajectoryKind::zigzag:
                // full triangle cycle spans 2*period frames, so direction
                // reverses every `period` frames starting at period/2
                p.x = cx + ax * triangle_wave(ft / (2.0 * spec.period));
                break;
            case TrajectoryKind::orbit: {
                const double th = 2.0 * M_PI * ft / spec.period;
                p.x = cx + ax * std::cos(th);
                p.y = cy + ay * std::sin(th);
                break;
            }
            case TrajectoryKind::dash:
                p.x = cx + ax * (2.0 * smoothstep(ft / spec.period) - 1.0);
                break;
            case TrajectoryKind::squat_rise:
                // vertical compression of up to 40% about the sprite center,
                // scaled by amplitude; centroid stays fixed
                p.height_scale =
                    1.0 - 0.4 * spec.amplitude * 0.5 *
                              (1.0 - std::cos(2.0 * M_PI * ft / spec.period));
                break;
            default:
                throw ConfigError("invalid trajectory kind value");
        }
        poses[static_cast<size_t>(i)] = p;
    }
    return poses;
}

}  // namespace actflow::synth
