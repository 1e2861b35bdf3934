#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/diffusion/schedule.hpp"
#include "actflow/harness/train_base.hpp"
#include "actflow/mmdit/loss.hpp"
#include "actflow/nn/batch.hpp"
#include "actflow/nn/optim.hpp"
#include "actflow/refadapter/adapter_weights.hpp"
#include "actflow/refadapter/refadapter.hpp"

namespace actflow::refadapter {

struct AdapterTrainConfig {
    int64_t steps = 2000;
    int64_t batch = 8;
    double lr = 1e-4;
    int64_t rank = 8;
    double scale = 1.0;
    double grad_clip = 1.0;
    uint64_t seed = 2;
    int64_t log_every = 25;
};

template <typename Real>
struct AdapterTrainResult {
    AdapterWeights<Real> adapter;
    harness::LossLog loss_log;
};

// Stage 1: only the adapter trains; the base stays frozen (it is bound to
// the graph without a gradient buffer, so a gradient cannot even be
// allocated for it). Condition frames are drawn uniformly from each clip and
// the first temporal latent slot is replaced by the condition latent.
template <typename Real>
AdapterTrainResult<Real> train_refadapter(const mmdit::Model<Real>& model,
                                          const std::vector<harness::TrainItem>& dataset,
                                          const codec::Codec& codec,
                                          const diffusion::NoiseSchedule& sched,
                                          const AdapterTrainConfig& cfg) {
    if (dataset.empty()) {
        throw ContractError("training dataset is empty");
    }
    Rng rng(cfg.seed);
    AdapterTrainResult<Real> out;
    out.adapter = AdapterWeights<Real>::init(model.cfg.layers, model.cfg.dim, cfg.rank,
                                             static_cast<Real>(cfg.scale), rng);

    typename nn::AdamW<Real>::Options opt_cfg;
    opt_cfg.lr = static_cast<Real>(cfg.lr);
    opt_cfg.grad_clip = static_cast<Real>(cfg.grad_clip);
    nn::AdamW<Real> optim(out.adapter.params, opt_cfg);
    nn::GradBuffer<Real> grads(out.adapter.params);

    std::vector<codec::LatentGrid> latents;
    latents.reserve(dataset.size());
    for (const harness::TrainItem& item : dataset) {
        latents.push_back(codec.encode_video(item.video));
    }

    for (int64_t step = 0; step < cfg.steps; ++step) {
        std::vector<harness::detail::DrawnSample> drawn(static_cast<size_t>(cfg.batch));
        std::vector<codec::LatentGrid> cond(static_cast<size_t>(cfg.batch));
        for (int64_t i = 0; i < cfg.batch; ++i) {
            auto& d = drawn[static_cast<size_t>(i)];
            d.item = static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(dataset.size())));
            auto picked = select_condition_frame(dataset[d.item].video, rng);
            d.cond_frame = picked.index;
            cond[static_cast<size_t>(i)] = codec.encode_image(picked.frame);
            d.t = rng.uniform_int(sched.T);
            d.noise = diffusion::sample_noise_like(latents[d.item], rng);
        }
        const double loss = nn::batched_loss_and_grads<Real>(
            out.adapter.params, grads, cfg.batch,
            [&](nn::Graph<Real>& g, int64_t i) {
                const auto& d = drawn[static_cast<size_t>(i)];
                auto noisy = diffusion::q_sample(latents[d.item], sched, d.t, d.noise);
                auto bundle = build_conditioning(noisy, cond[static_cast<size_t>(i)],
                                                 /*replace_first=*/true, d.cond_frame);
                mmdit::ForwardOptions<Real> fwd;
                fwd.adapter = &out.adapter;
                return mmdit::denoise_loss_node<Real>(g, model, bundle.model_input, d.t,
                                                      dataset[d.item].prompt_ids, d.noise,
                                                      fwd);
            });
        harness::detail::check_finite(loss, step);
        optim.step(grads);
        if (step % cfg.log_every == 0 || step + 1 == cfg.steps) {
            out.loss_log.emplace_back(step, loss);
        }
    }
    return out;
}

}  // namespace actflow::refadapter
