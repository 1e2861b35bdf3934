#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/core/video.hpp"
#include "actflow/diffusion/schedule.hpp"
#include "actflow/fae/frequency_embedding.hpp"
#include "actflow/mmdit/model.hpp"
#include "actflow/refadapter/refadapter.hpp"

namespace actflow::fae {

struct CropInfo {
    std::vector<int64_t> y0;  // per-frame offsets; identical across frames
    std::vector<int64_t> x0;
    int64_t crop_h = 0;
    int64_t crop_w = 0;
};

struct CroppedVideo {
    VideoTensor video;
    CropInfo info;
};

namespace detail {

// Bilinear resize of one crop window back to (out_h, out_w). With a
// full-frame window this is an exact identity.
inline VideoTensor resize_crop(const VideoTensor& v, int64_t y0, int64_t x0,
                               int64_t crop_h, int64_t crop_w, int64_t out_h,
                               int64_t out_w) {
    VideoTensor out(v.frames, out_h, out_w);
    const double sy = static_cast<double>(crop_h) / static_cast<double>(out_h);
    const double sx = static_cast<double>(crop_w) / static_cast<double>(out_w);
    for (int64_t t = 0; t < v.frames; ++t)
        for (int64_t y = 0; y < out_h; ++y) {
            const double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
            int64_t iy = static_cast<int64_t>(std::floor(fy));
            double wy = fy - static_cast<double>(iy);
            const int64_t iy0 = std::clamp<int64_t>(iy, 0, crop_h - 1);
            const int64_t iy1 = std::clamp<int64_t>(iy + 1, 0, crop_h - 1);
            for (int64_t x = 0; x < out_w; ++x) {
                const double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
                int64_t ix = static_cast<int64_t>(std::floor(fx));
                double wx = fx - static_cast<double>(ix);
                const int64_t ix0 = std::clamp<int64_t>(ix, 0, crop_w - 1);
                const int64_t ix1 = std::clamp<int64_t>(ix + 1, 0, crop_w - 1);
                for (int64_t c = 0; c < 3; ++c) {
                    const double v00 = v.at(t, y0 + iy0, x0 + ix0, c);
                    const double v01 = v.at(t, y0 + iy0, x0 + ix1, c);
                    const double v10 = v.at(t, y0 + iy1, x0 + ix0, c);
                    const double v11 = v.at(t, y0 + iy1, x0 + ix1, c);
                    out.at(t, y, x, c) = (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01) +
                                         wy * ((1.0 - wx) * v10 + wx * v11);
                }
            }
        }
    return out;
}

}  // namespace detail

// Spatial window with area >= min_area_fraction of the frame, identical
// across all frames of the clip, resized back to the input resolution.
inline CroppedVideo random_crop(const VideoTensor& v, Rng& rng,
                                double min_area_fraction, int64_t min_cell = 1) {
    if (!(min_area_fraction > 0.0 && min_area_fraction <= 1.0)) {
        throw ContractError("min_area_fraction must lie in (0, 1]");
    }
    const double f = rng.uniform(min_area_fraction, 1.0);
    const double side = std::sqrt(f);
    int64_t crop_h = std::min<int64_t>(
        v.height, static_cast<int64_t>(std::ceil(side * static_cast<double>(v.height))));
    int64_t crop_w = std::min<int64_t>(
        v.width, static_cast<int64_t>(std::ceil(side * static_cast<double>(v.width))));
    if (crop_h < min_cell || crop_w < min_cell) {
        throw DegenerateInputError("crop window smaller than one latent cell");
    }
    const int64_t y0 = rng.uniform_int(v.height - crop_h + 1);
    const int64_t x0 = rng.uniform_int(v.width - crop_w + 1);

    CroppedVideo out;
    out.video = detail::resize_crop(v, y0, x0, crop_h, crop_w, v.height, v.width);
    out.info.crop_h = crop_h;
    out.info.crop_w = crop_w;
    out.info.y0.assign(static_cast<size_t>(v.frames), y0);
    out.info.x0.assign(static_cast<size_t>(v.frames), x0);
    return out;
}

// One spatial attention map per requested timestep: video->freq attention
// averaged over layers, heads and freq tokens, on the token grid.
struct AttentionMap {
    int64_t timestep = 0;
    int64_t slots = 0;  // T'
    int64_t grid_h = 0;
    int64_t grid_w = 0;
    std::vector<double> values;  // [slots, grid_h, grid_w]

    double at(int64_t s, int64_t gy, int64_t gx) const {
        return values[static_cast<size_t>((s * grid_h + gy) * grid_w + gx)];
    }
};

template <typename Real>
std::vector<AttentionMap> extract_attention_maps(
    const mmdit::Model<Real>& model, const FrequencyEmbedding<Real>& freq,
    const VideoTensor& reference_video, const std::vector<int64_t>& prompt_ids,
    const std::vector<int64_t>& timesteps, const codec::Codec& codec,
    const diffusion::NoiseSchedule& sched, uint64_t seed) {
    for (int64_t t : timesteps) {
        if (t < 0 || t >= sched.T) {
            throw ContractError("attention-map timestep outside [0, T)");
        }
    }
    const codec::LatentGrid l0 = codec.encode_video(reference_video);
    const codec::LatentGrid img =
        codec.encode_image(frame_of(reference_video, 0));
    const int64_t gh = model.latent.h / model.cfg.patch;
    const int64_t gw = model.latent.w / model.cfg.patch;

    std::vector<AttentionMap> maps;
    maps.reserve(timesteps.size());
    for (int64_t t : timesteps) {
        Rng rng = Rng::for_stream(seed, static_cast<uint64_t>(t));
        codec::LatentGrid noise = diffusion::sample_noise_like(l0, rng);
        codec::LatentGrid xt = diffusion::q_sample(l0, sched, t, noise);
        auto bundle = refadapter::build_conditioning(xt, img, /*replace_first=*/false);

        mmdit::AttnCapture cap;
        mmdit::ForwardOptions<Real> opt;
        opt.freq = &freq;
        opt.bias = Real(0);
        opt.capture = &cap;
        model.forward(bundle.model_input, t, prompt_ids, opt);

        nn::Mat<double> mean = cap.mean();  // [Nv, Nf]
        AttentionMap m;
        m.timestep = t;
        m.slots = model.latent.t;
        m.grid_h = gh;
        m.grid_w = gw;
        m.values.resize(static_cast<size_t>(mean.rows), 0.0);
        for (int64_t r = 0; r < mean.rows; ++r) {
            double acc = 0.0;
            for (int64_t c = 0; c < mean.cols; ++c) acc += mean.at(r, c);
            m.values[static_cast<size_t>(r)] = acc / static_cast<double>(mean.cols);
        }
        maps.push_back(std::move(m));
    }
    return maps;
}

// Token-grid mask of where the sprite moves: a token cell is in the motion
// region if any frame covered by its temporal slot has sprite coverage above
// the threshold inside the cell's pixel footprint.
inline std::vector<uint8_t> motion_region_token_mask(
    const std::vector<std::vector<double>>& coverage_masks, int64_t height,
    int64_t width, int f_t, int f_s, int64_t patch, double threshold = 0.05) {
    const int64_t frames = static_cast<int64_t>(coverage_masks.size());
    const int64_t slots = frames / f_t;
    const int64_t cell = static_cast<int64_t>(f_s) * patch;
    const int64_t gh = height / cell, gw = width / cell;
    std::vector<uint8_t> mask(static_cast<size_t>(slots * gh * gw), 0);
    for (int64_t s = 0; s < slots; ++s)
        for (int64_t gy = 0; gy < gh; ++gy)
            for (int64_t gx = 0; gx < gw; ++gx) {
                bool hit = false;
                for (int64_t dt = 0; dt < f_t && !hit; ++dt) {
                    const auto& cov = coverage_masks[static_cast<size_t>(s * f_t + dt)];
                    for (int64_t y = gy * cell; y < (gy + 1) * cell && !hit; ++y)
                        for (int64_t x = gx * cell; x < (gx + 1) * cell && !hit; ++x)
                            hit = cov[static_cast<size_t>(y * width + x)] > threshold;
                }
                mask[static_cast<size_t>((s * gh + gy) * gw + gx)] = hit ? 1 : 0;
            }
    return mask;
}

// Fraction of total attention mass falling inside the region mask.
inline double attention_fraction_in_region(const AttentionMap& map,
                                           const std::vector<uint8_t>& mask) {
    if (mask.size() != map.values.size()) {
        throw ContractError("region mask does not match attention map geometry");
    }
    double inside = 0.0, total = 0.0;
    for (size_t i = 0; i < map.values.size(); ++i) {
        total += map.values[i];
        if (mask[i]) inside += map.values[i];
    }
    if (total <= 0.0) {
        throw NumericError("attention map has no mass");
    }
    return inside / total;
}

}  // namespace actflow::fae
