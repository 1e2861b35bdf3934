#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/diffusion/schedule.hpp"
#include "actflow/harness/dataset.hpp"
#include "actflow/mmdit/loss.hpp"
#include "actflow/mmdit/model.hpp"
#include "actflow/nn/batch.hpp"
#include "actflow/nn/optim.hpp"

namespace actflow::harness {

struct BaseTrainConfig {
    int64_t steps = 5000;
    int64_t batch = 8;
    double lr = 3e-4;
    int64_t warmup_steps = 100;
    double grad_clip = 1.0;
    uint64_t seed = 1;
    int64_t log_every = 25;
};

using LossLog = std::vector<std::pair<int64_t, double>>;

namespace detail {

// Pre-drawn randomness for one training sample; drawing happens on the
// single-threaded path so parallel batch evaluation stays deterministic.
struct DrawnSample {
    size_t item = 0;
    int64_t cond_frame = 0;
    int64_t t = 0;
    codec::LatentGrid noise;
};

inline void check_finite(double loss, int64_t step) {
    if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at step " + std::to_string(step));
    }
}

}  // namespace detail

// Stage 0: standard I2V pretraining on the synthetic corpus, first frame as
// condition, no slot replacement. All model parameters train.
template <typename Real>
LossLog train_base(mmdit::Model<Real>& model, const std::vector<TrainItem>& dataset,
                   const codec::Codec& codec, const diffusion::NoiseSchedule& sched,
                   const BaseTrainConfig& cfg) {
    if (dataset.empty()) {
        throw ContractError("training dataset is empty");
    }
    model.params.set_all_trainable(true);
    typename nn::AdamW<Real>::Options opt_cfg;
    opt_cfg.lr = static_cast<Real>(cfg.lr);
    opt_cfg.grad_clip = static_cast<Real>(cfg.grad_clip);
    opt_cfg.warmup_steps = cfg.warmup_steps;
    nn::AdamW<Real> optim(model.params, opt_cfg);
    nn::GradBuffer<Real> grads(model.params);
    Rng rng(cfg.seed);
    LossLog log;

    // latent encodings reused across steps
    std::vector<codec::LatentGrid> latents;
    std::vector<codec::LatentGrid> cond_latents;
    latents.reserve(dataset.size());
    cond_latents.reserve(dataset.size());
    for (const TrainItem& item : dataset) {
        latents.push_back(codec.encode_video(item.video));
        cond_latents.push_back(codec.encode_image(frame_of(item.video, 0)));
    }

    for (int64_t step = 0; step < cfg.steps; ++step) {
        std::vector<detail::DrawnSample> drawn(static_cast<size_t>(cfg.batch));
        for (auto& d : drawn) {
            d.item = static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(dataset.size())));
            d.t = rng.uniform_int(sched.T);
            d.noise = diffusion::sample_noise_like(latents[d.item], rng);
        }
        const double loss = nn::batched_loss_and_grads<Real>(
            model.params, grads, cfg.batch,
            [&](nn::Graph<Real>& g, int64_t i) {
                const auto& d = drawn[static_cast<size_t>(i)];
                auto noisy = diffusion::q_sample(latents[d.item], sched, d.t, d.noise);
                auto bundle = refadapter::build_conditioning(noisy, cond_latents[d.item],
                                                             /*replace_first=*/false, 0);
                return mmdit::denoise_loss_node<Real>(g, model, bundle.model_input, d.t,
                                                      dataset[d.item].prompt_ids, d.noise);
            });
        detail::check_finite(loss, step);
        optim.step(grads);
        if (step % cfg.log_every == 0 || step + 1 == cfg.steps) {
            log.emplace_back(step, loss);
        }
    }
    return log;
}

// Smoothed loss around a step: mean over the log entries in
// [step - window, step + window].
inline double smoothed_loss_at(const LossLog& log, int64_t step, int64_t window = 100) {
    double acc = 0.0;
    int64_t n = 0;
    for (const auto& [s, l] : log) {
        if (s >= step - window && s <= step + window) {
            acc += l;
            ++n;
        }
    }
    if (n == 0) {
        throw ContractError("no logged losses near step " + std::to_string(step));
    }
    return acc / static_cast<double>(n);
}

}  // namespace actflow::harness
