#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/core/video.hpp"
#include "actflow/mmdit/model.hpp"
#include "actflow/refadapter/adapter_weights.hpp"

namespace actflow::refadapter {

// Channel-concatenated model input plus provenance of how it was built.
// Channels [0, C) are the (noisy or pure-noise) video side, [C, 2C) the
// zero-padded condition side.
struct ConditioningBundle {
    codec::LatentGrid model_input;  // 2C channels
    int64_t condition_frame_index = -1;
    bool replaced_first_slot = false;
};

struct ConditionFrame {
    ImageTensor frame;
    int64_t index = 0;
};

// Uniformly random condition frame from the clip (the RefAdapter training
// distribution; plain I2V conditioning uses frame 0 instead).
inline ConditionFrame select_condition_frame(const VideoTensor& video, Rng& rng) {
    if (video.frames < 2) {
        throw DegenerateInputError("condition frame selection needs at least 2 frames");
    }
    const int64_t idx = rng.uniform_int(video.frames);
    return ConditionFrame{frame_of(video, idx), idx};
}

// (1) optionally overwrite temporal slot 0 of the video side with the image
// latent, (2) zero-pad the image latent to the video side's slot count,
// (3) concatenate along channels.
inline ConditioningBundle build_conditioning(const codec::LatentGrid& video_side,
                                             const codec::LatentGrid& image_latent,
                                             bool replace_first,
                                             int64_t condition_frame_index = -1) {
    if (image_latent.t != 1) {
        throw ShapeError("image latent must have a single temporal slot");
    }
    if (image_latent.h != video_side.h || image_latent.w != video_side.w) {
        throw ShapeError("image/video latent spatial dims differ");
    }
    if (image_latent.c != video_side.c) {
        throw ShapeError("image/video latent channel counts differ (" +
                         std::to_string(image_latent.c) + " vs " +
                         std::to_string(video_side.c) + ")");
    }

    codec::LatentGrid video = video_side;
    if (replace_first) {
        // slot 0 of the video side becomes the condition latent
        for (int64_t y = 0; y < video.h; ++y)
            for (int64_t x = 0; x < video.w; ++x)
                for (int64_t c = 0; c < video.c; ++c)
                    video.at(0, y, x, c) = image_latent.at(0, y, x, c);
    }
    codec::LatentGrid padded = codec::pad_image_latent(image_latent, video.t);

    ConditioningBundle out;
    out.model_input = codec::LatentGrid(video.t, video.h, video.w, 2 * video.c,
                                        video.f_t, video.f_s);
    for (int64_t tt = 0; tt < video.t; ++tt)
        for (int64_t y = 0; y < video.h; ++y)
            for (int64_t x = 0; x < video.w; ++x) {
                for (int64_t c = 0; c < video.c; ++c) {
                    out.model_input.at(tt, y, x, c) = video.at(tt, y, x, c);
                    out.model_input.at(tt, y, x, video.c + c) = padded.at(tt, y, x, c);
                }
            }
    out.condition_frame_index = condition_frame_index;
    out.replaced_first_slot = replace_first;
    return out;
}

// Adapter view over a frozen base model: every targeted projection computes
// base(x) + scale * up(down(x)).
template <typename Real>
struct AdaptedModel {
    const mmdit::Model<Real>* base = nullptr;
    const AdapterWeights<Real>* adapter = nullptr;

    codec::LatentGrid forward(const codec::LatentGrid& cond_input, int64_t t,
                              const std::vector<int64_t>& prompt_ids,
                              mmdit::ForwardOptions<Real> opt = {}) const {
        opt.adapter = adapter;
        return base->forward(cond_input, t, prompt_ids, opt);
    }
};

template <typename Real>
AdaptedModel<Real> inject_adapter(const mmdit::Model<Real>& model,
                                  const AdapterWeights<Real>& adapter) {
    std::vector<std::string> missing;
    for (int64_t l = 0; l < model.cfg.layers; ++l) {
        for (const std::string& proj : AdapterWeights<Real>::projection_names()) {
            for (const std::string& name : {AdapterWeights<Real>::down_name(l, proj),
                                            AdapterWeights<Real>::up_name(l, proj)}) {
                if (!adapter.params.has(name)) missing.push_back(name);
            }
        }
    }
    if (!missing.empty()) {
        std::string msg = "adapter is missing targets:";
        for (const std::string& m : missing) msg += " " + m;
        throw ConfigError(msg);
    }
    if (adapter.layers != model.cfg.layers || adapter.dim != model.cfg.dim) {
        throw ConfigError("adapter geometry does not match the model");
    }
    return AdaptedModel<Real>{&model, &adapter};
}

}  // namespace actflow::refadapter
