#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/core/video.hpp"
#include "actflow/synth/sprites.hpp"

namespace actflow::metrics {

// Pluggable frame/text encoder; both embedding paths return L2-normalized
// vectors of the same width and are deterministic per input.
struct EncoderHandle {
    std::function<std::vector<double>(const ImageTensor&)> frame_embed;
    std::function<std::vector<double>(const std::string&)> text_embed;
    int64_t dim = 0;
};

namespace detail {

inline std::array<double, 3> dominant_color(const ImageTensor& img) {
    // mode over quantized colors; synthetic backgrounds are uniform so this
    // recovers the background exactly
    std::map<std::array<int, 3>, int64_t> counts;
    for (int64_t y = 0; y < img.height; ++y)
        for (int64_t x = 0; x < img.width; ++x) {
            std::array<int, 3> key;
            for (int c = 0; c < 3; ++c) {
                key[static_cast<size_t>(c)] =
                    static_cast<int>(std::lround(img.at(y, x, c) * 255.0));
            }
            counts[key] += 1;
        }
    std::array<int, 3> best{0, 0, 0};
    int64_t best_n = -1;
    for (const auto& [key, n] : counts) {
        if (n > best_n) {
            best = key;
            best_n = n;
        }
    }
    return {static_cast<double>(best[0]) / 255.0, static_cast<double>(best[1]) / 255.0,
            static_cast<double>(best[2]) / 255.0};
}

inline double l2_normalize(std::vector<double>& v) {
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    const double n = std::sqrt(n2);
    if (n > 0.0) {
        for (double& x : v) x /= n;
    }
    return n;
}

}  // namespace detail

// Foreground-weighted descriptor: constant anchor, foreground mean color and
// area, 4x4 occupancy grid, 4^3 foreground color histogram. The constant
// anchor keeps embeddings well-defined (and equal) for empty frames.
inline std::vector<double> toy_frame_descriptor(const ImageTensor& img) {
    static const int64_t kGrid = 4;
    static const int64_t kBins = 4;
    const std::array<double, 3> bg = detail::dominant_color(img);

    std::vector<double> desc(1 + 3 + 1 + kGrid * kGrid + kBins * kBins * kBins, 0.0);
    desc[0] = 0.25;  // anchor
    double total_w = 0.0;
    for (int64_t y = 0; y < img.height; ++y)
        for (int64_t x = 0; x < img.width; ++x) {
            double d2 = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double dd = img.at(y, x, c) - bg[static_cast<size_t>(c)];
                d2 += dd * dd;
            }
            const double w = std::sqrt(d2);
            if (w <= 1e-9) continue;
            total_w += w;
            for (int c = 0; c < 3; ++c) desc[1 + static_cast<size_t>(c)] += w * img.at(y, x, c);
            const int64_t gy = y * kGrid / img.height;
            const int64_t gx = x * kGrid / img.width;
            desc[5 + static_cast<size_t>(gy * kGrid + gx)] += w;
            std::array<int64_t, 3> bin;
            for (int c = 0; c < 3; ++c) {
                bin[static_cast<size_t>(c)] = std::min<int64_t>(
                    kBins - 1, static_cast<int64_t>(img.at(y, x, c) * static_cast<double>(kBins)));
            }
            desc[5 + static_cast<size_t>(kGrid * kGrid) +
                 static_cast<size_t>((bin[0] * kBins + bin[1]) * kBins + bin[2])] += w;
        }
    if (total_w > 0.0) {
        for (int c = 0; c < 3; ++c) desc[1 + static_cast<size_t>(c)] /= total_w;
        desc[4] = total_w / static_cast<double>(img.height * img.width);
        const size_t occ0 = 5, occ1 = occ0 + static_cast<size_t>(kGrid * kGrid);
        for (size_t i = occ0; i < desc.size(); ++i) desc[i] /= total_w;
        (void)occ1;
    }
    detail::l2_normalize(desc);
    return desc;
}

struct ToyEncoderConfig {
    int64_t canonical_resolution = 32;
    double canonical_sprite_size = 13.0;
    std::array<double, 3> canonical_background = {0.15, 0.15, 0.15};
};

// Canonical rendering of a prompt's subject: the named sprite centered on a
// fixed background. Unknown words are ignored; with no recognized subject
// the plain background is rendered.
inline ImageTensor canonical_rendering(const std::string& prompt,
                                       const ToyEncoderConfig& cfg = {}) {
    synth::SpriteScene scene;
    scene.background = cfg.canonical_background;
    scene.size = cfg.canonical_sprite_size;
    bool have_shape = false, have_color = false;

    std::istringstream ss(prompt);
    std::string word;
    while (ss >> word) {
        for (const auto& c : synth::sprite_palette()) {
            if (word == c.word) {
                scene.color = c.rgb;
                have_color = true;
            }
        }
        for (const char* s : {"square", "circle", "triangle", "star"}) {
            if (word == s) {
                scene.shape = synth::sprite_shape_from_string(s);
                have_shape = true;
            }
        }
    }

    const int64_t res = cfg.canonical_resolution;
    if (!have_shape && !have_color) {
        ImageTensor img(res, res);
        for (int64_t y = 0; y < res; ++y)
            for (int64_t x = 0; x < res; ++x)
                for (int c = 0; c < 3; ++c)
                    img.at(y, x, c) = cfg.canonical_background[static_cast<size_t>(c)];
        return img;
    }
    const double center = static_cast<double>(res - 1) / 2.0;
    std::vector<synth::SpritePose> pose = {{center, center, 1.0}};
    return frame_of(synth::render_video(scene, pose, res, res), 0);
}

inline EncoderHandle make_toy_encoder(const ToyEncoderConfig& cfg = {}) {
    EncoderHandle h;
    h.dim = static_cast<int64_t>(toy_frame_descriptor(ImageTensor(4, 4)).size());
    h.frame_embed = [](const ImageTensor& img) { return toy_frame_descriptor(img); };
    h.text_embed = [cfg](const std::string& prompt) {
        return toy_frame_descriptor(canonical_rendering(prompt, cfg));
    };
    return h;
}

// Encoder registry keyed by config name.
inline EncoderHandle make_encoder(const std::string& key) {
    if (key == "toy") return make_toy_encoder();
    throw ConfigError("unknown encoder: " + key);
}

}  // namespace actflow::metrics
