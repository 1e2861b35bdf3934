#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/core/video.hpp"
#include "actflow/metrics/encoder.hpp"
#include "actflow/synth/corpus.hpp"

namespace actflow::metrics {

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ContractError("embedding dimension mismatch");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) {
        throw NumericError("cosine of zero vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Foreground centroid tracker: per-frame mask by distance from the video's
// dominant (background) color, centroid weighted by that distance. On the
// synthetic corpus the weight is proportional to sprite coverage, so the
// weighted centroid recovers the ground-truth trajectory.
inline synth::Tracklets track_centroids(const VideoTensor& v) {
    // dominant color over the whole clip
    ImageTensor all(v.frames * v.height, v.width);
    all.data = v.data;
    const std::array<double, 3> bg = detail::dominant_color(all);

    synth::Tracklets out;
    out.positions.resize(static_cast<size_t>(v.frames), {0.0, 0.0});
    out.valid.assign(static_cast<size_t>(v.frames), 0);
    for (int64_t t = 0; t < v.frames; ++t) {
        double acc_w = 0.0, acc_x = 0.0, acc_y = 0.0;
        for (int64_t y = 0; y < v.height; ++y)
            for (int64_t x = 0; x < v.width; ++x) {
                double d2 = 0.0;
                for (int c = 0; c < 3; ++c) {
                    const double dd = v.at(t, y, x, c) - bg[static_cast<size_t>(c)];
                    d2 += dd * dd;
                }
                const double w = std::sqrt(d2);
                if (w <= 1e-9) continue;
                acc_w += w;
                acc_x += w * static_cast<double>(x);
                acc_y += w * static_cast<double>(y);
            }
        if (acc_w > 1e-6) {
            out.positions[static_cast<size_t>(t)] = {acc_x / acc_w, acc_y / acc_w};
            out.valid[static_cast<size_t>(t)] = 1;
        }
    }
    return out;
}

namespace detail {

inline std::vector<std::array<double, 2>> valid_positions(const synth::Tracklets& t) {
    std::vector<std::array<double, 2>> out;
    for (size_t i = 0; i < t.positions.size(); ++i) {
        if (t.valid[i]) out.push_back(t.positions[i]);
    }
    return out;
}

inline std::vector<std::array<double, 2>> resample_positions(
    const std::vector<std::array<double, 2>>& p, size_t n) {
    if (p.size() == n) return p;
    std::vector<std::array<double, 2>> out(n);
    for (size_t i = 0; i < n; ++i) {
        const double u = n == 1 ? 0.0
                                : static_cast<double>(i) *
                                      static_cast<double>(p.size() - 1) /
                                      static_cast<double>(n - 1);
        const size_t i0 = static_cast<size_t>(std::floor(u));
        const size_t i1 = std::min(i0 + 1, p.size() - 1);
        const double w = u - static_cast<double>(i0);
        out[i] = {(1.0 - w) * p[i0][0] + w * p[i1][0],
                  (1.0 - w) * p[i0][1] + w * p[i1][1]};
    }
    return out;
}

// Mean removal and diameter normalization. Cosine similarity of displacement
// pairs is already translation/scale invariant; the normalization pins down
// which displacements count as zero.
inline void normalize_trajectory(std::vector<std::array<double, 2>>& p) {
    double mx = 0.0, my = 0.0;
    for (const auto& q : p) {
        mx += q[0];
        my += q[1];
    }
    mx /= static_cast<double>(p.size());
    my /= static_cast<double>(p.size());
    for (auto& q : p) {
        q[0] -= mx;
        q[1] -= my;
    }
    double diameter = 0.0;
    for (size_t i = 0; i < p.size(); ++i)
        for (size_t j = i + 1; j < p.size(); ++j) {
            const double dx = p[i][0] - p[j][0], dy = p[i][1] - p[j][1];
            diameter = std::max(diameter, std::sqrt(dx * dx + dy * dy));
        }
    if (diameter > 0.0) {
        for (auto& q : p) {
            q[0] /= diameter;
            q[1] /= diameter;
        }
    }
}

}  // namespace detail

// Trajectory-similarity score: mean cosine of corresponding per-step
// displacement vectors after mean removal and diameter normalization.
// Zero-length displacement pairs contribute 1 if both are zero, 0 otherwise.
inline double motion_fidelity(const synth::Tracklets& ref, const synth::Tracklets& gen) {
    auto pr = detail::valid_positions(ref);
    auto pg = detail::valid_positions(gen);
    if (pr.size() < 2 || pg.size() < 2) {
        throw InsufficientDataError("motion fidelity needs >= 2 valid frames in each track");
    }
    const size_t n = std::max(pr.size(), pg.size());
    pr = detail::resample_positions(pr, n);
    pg = detail::resample_positions(pg, n);
    detail::normalize_trajectory(pr);
    detail::normalize_trajectory(pg);

    static const double kZero = 1e-12;
    double acc = 0.0;
    for (size_t i = 0; i + 1 < n; ++i) {
        const double ax = pr[i + 1][0] - pr[i][0], ay = pr[i + 1][1] - pr[i][1];
        const double bx = pg[i + 1][0] - pg[i][0], by = pg[i + 1][1] - pg[i][1];
        const double na = std::sqrt(ax * ax + ay * ay);
        const double nb = std::sqrt(bx * bx + by * by);
        if (na <= kZero && nb <= kZero) {
            acc += 1.0;
        } else if (na <= kZero || nb <= kZero) {
            acc += 0.0;
        } else {
            acc += (ax * bx + ay * by) / (na * nb);
        }
    }
    return acc / static_cast<double>(n - 1);
}

// Mean cosine similarity over all unordered frame pairs.
inline double temporal_consistency(const VideoTensor& v, const EncoderHandle& enc) {
    if (v.frames < 2) {
        throw InsufficientDataError("temporal consistency needs >= 2 frames");
    }
    std::vector<std::vector<double>> emb;
    emb.reserve(static_cast<size_t>(v.frames));
    for (int64_t t = 0; t < v.frames; ++t) emb.push_back(enc.frame_embed(frame_of(v, t)));
    double acc = 0.0;
    int64_t n = 0;
    for (int64_t i = 0; i < v.frames; ++i)
        for (int64_t j = i + 1; j < v.frames; ++j) {
            acc += cosine(emb[static_cast<size_t>(i)], emb[static_cast<size_t>(j)]);
            ++n;
        }
    return acc / static_cast<double>(n);
}

// Mean cosine similarity between frame 0 and each remaining frame.
inline double appearance_consistency(const VideoTensor& v, const EncoderHandle& enc) {
    if (v.frames < 2) {
        throw InsufficientDataError("appearance consistency needs >= 2 frames");
    }
    const auto e0 = enc.frame_embed(frame_of(v, 0));
    double acc = 0.0;
    for (int64_t t = 1; t < v.frames; ++t) {
        acc += cosine(e0, enc.frame_embed(frame_of(v, t)));
    }
    return acc / static_cast<double>(v.frames - 1);
}

// Mean over frames of cosine(frame embedding, prompt embedding).
inline double text_similarity(const VideoTensor& v, const std::string& prompt,
                              const EncoderHandle& enc) {
    if (prompt.empty()) {
        throw ContractError("prompt must be nonempty");
    }
    if (v.frames < 1) {
        throw InsufficientDataError("text similarity needs >= 1 frame");
    }
    const auto et = enc.text_embed(prompt);
    double acc = 0.0;
    for (int64_t t = 0; t < v.frames; ++t) {
        acc += cosine(enc.frame_embed(frame_of(v, t)), et);
    }
    return acc / static_cast<double>(v.frames);
}

struct MetricReport {
    double text_similarity = 0.0;
    double motion_fidelity = 0.0;
    bool motion_fidelity_valid = false;
    double temporal_consistency = 0.0;
    double appearance_consistency = 0.0;
    std::string run_id;
    uint64_t seed = 0;
    std::string prompt;
};

}  // namespace actflow::metrics
