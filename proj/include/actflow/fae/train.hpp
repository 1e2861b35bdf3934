#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/core/video.hpp"
#include "actflow/diffusion/schedule.hpp"
#include "actflow/fae/fae.hpp"
#include "actflow/fae/frequency_embedding.hpp"
#include "actflow/harness/train_base.hpp"
#include "actflow/mmdit/loss.hpp"
#include "actflow/nn/batch.hpp"
#include "actflow/nn/optim.hpp"

namespace actflow::fae {

struct FaeTrainConfig {
    int64_t steps = 1500;
    int64_t batch = 4;
    double lr = 5e-3;
    int64_t tokens = 8;
    double init_std = 0.02;
    double min_area_fraction = 0.6;
    double grad_clip = 1.0;
    uint64_t seed = 3;
    int64_t log_every = 25;
    std::string reference_id = "reference";
};

template <typename Real>
struct FaeTrainResult {
    FrequencyEmbedding<Real> embedding;
    harness::LossLog loss_log;
};

// Stage 2: per-reference-video embedding training. The base model is frozen
// and the RefAdapter is structurally absent from the graph. Each step random-
// crops the reference clip; the crop's first frame is the condition (standard
// I2V conditioning, no slot replacement); the schedule bias stays 0 during
// training.
template <typename Real>
FaeTrainResult<Real> train_fae(const mmdit::Model<Real>& model,
                               const VideoTensor& reference_video,
                               const std::vector<int64_t>& prompt_ids,
                               const codec::Codec& codec,
                               const diffusion::NoiseSchedule& sched,
                               const FaeTrainConfig& cfg) {
    Rng rng(cfg.seed);
    FaeTrainResult<Real> out;
    out.embedding = FrequencyEmbedding<Real>::init(model.cfg.layers, cfg.tokens,
                                                   model.cfg.dim, cfg.reference_id,
                                                   static_cast<Real>(cfg.init_std), rng);

    typename nn::AdamW<Real>::Options opt_cfg;
    opt_cfg.lr = static_cast<Real>(cfg.lr);
    opt_cfg.grad_clip = static_cast<Real>(cfg.grad_clip);
    nn::AdamW<Real> optim(out.embedding.params, opt_cfg);
    nn::GradBuffer<Real> grads(out.embedding.params);

    for (int64_t step = 0; step < cfg.steps; ++step) {
        std::vector<codec::LatentGrid> noisy(static_cast<size_t>(cfg.batch));
        std::vector<codec::LatentGrid> cond(static_cast<size_t>(cfg.batch));
        std::vector<codec::LatentGrid> noise(static_cast<size_t>(cfg.batch));
        std::vector<int64_t> ts(static_cast<size_t>(cfg.batch));
        for (int64_t i = 0; i < cfg.batch; ++i) {
            CroppedVideo crop =
                random_crop(reference_video, rng, cfg.min_area_fraction, codec.f_s());
            codec::LatentGrid l0 = codec.encode_video(crop.video);
            cond[static_cast<size_t>(i)] = codec.encode_image(frame_of(crop.video, 0));
            ts[static_cast<size_t>(i)] = rng.uniform_int(sched.T);
            noise[static_cast<size_t>(i)] = diffusion::sample_noise_like(l0, rng);
            noisy[static_cast<size_t>(i)] = diffusion::q_sample(
                l0, sched, ts[static_cast<size_t>(i)], noise[static_cast<size_t>(i)]);
        }
        const double loss = nn::batched_loss_and_grads<Real>(
            out.embedding.params, grads, cfg.batch,
            [&](nn::Graph<Real>& g, int64_t i) {
                auto bundle = refadapter::build_conditioning(
                    noisy[static_cast<size_t>(i)], cond[static_cast<size_t>(i)],
                    /*replace_first=*/false, 0);
                mmdit::ForwardOptions<Real> fwd;
                fwd.freq = &out.embedding;
                fwd.bias = Real(0);
                return mmdit::denoise_loss_node<Real>(g, model, bundle.model_input,
                                                      ts[static_cast<size_t>(i)],
                                                      prompt_ids,
                                                      noise[static_cast<size_t>(i)], fwd);
            });
        harness::detail::check_finite(loss, step);
        optim.step(grads);
        if (step % cfg.log_every == 0 || step + 1 == cfg.steps) {
            out.loss_log.emplace_back(step, loss);
        }
    }
    return out;
}

}  // namespace actflow::fae
