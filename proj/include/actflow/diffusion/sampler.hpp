#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/diffusion/schedule.hpp"

namespace actflow::diffusion {

// Per-timestep attention-bias hook; evaluated at the true diffusion timestep
// of each sampler step. An empty function means no bias machinery at all.
using BiasHook = std::function<double(int64_t)>;

// Uniformly strided timestep subsequence from T-1 down to 0.
inline std::vector<int64_t> sampling_timesteps(int64_t T, int64_t num_steps) {
    if (num_steps < 1 || num_steps > T) {
        throw ContractError("num_steps must lie in [1, T]");
    }
    std::vector<int64_t> ts(static_cast<size_t>(num_steps));
    for (int64_t k = 0; k < num_steps; ++k) {
        const int64_t idx = num_steps - 1 - k;  // descending
        ts[static_cast<size_t>(k)] =
            num_steps == 1
                ? T - 1
                : static_cast<int64_t>(std::llround(
                      static_cast<double>(idx) * static_cast<double>(T - 1) /
                      static_cast<double>(num_steps - 1)));
    }
    return ts;
}

// Deterministic DDIM (eta = 0) sampling. `model` is a callable
// (video_latent, cond_latent, t, bias) -> predicted noise LatentGrid.
// `init_video_latent` is the caller-built starting latent (pure noise, with
// slot 0 optionally replaced by the condition latent).
template <typename ModelFn>
codec::LatentGrid sample(ModelFn&& model, const codec::LatentGrid& init_video_latent,
                         const codec::LatentGrid& cond_latent,
                         const NoiseSchedule& sched, int64_t num_steps,
                         const BiasHook& bias_hook = {}) {
    const auto ts = sampling_timesteps(sched.T, num_steps);
    codec::LatentGrid x = init_video_latent;
    for (size_t k = 0; k < ts.size(); ++k) {
        const int64_t t = ts[k];
        const double bias = bias_hook ? bias_hook(t) : 0.0;
        codec::LatentGrid eps = model(x, cond_latent, t, bias);
        if (!eps.same_shape(x)) {
            throw ContractError("model prediction shape mismatch during sampling");
        }
        const double ab_t = sched.alpha_bars[static_cast<size_t>(t)];
        const double ab_prev =
            (k + 1 < ts.size()) ? sched.alpha_bars[static_cast<size_t>(ts[k + 1])] : 1.0;
        const double sa_t = std::sqrt(ab_t);
        const double sb_t = std::sqrt(1.0 - ab_t);
        const double sa_p = std::sqrt(ab_prev);
        const double sb_p = std::sqrt(1.0 - ab_prev);
        for (size_t i = 0; i < x.data.size(); ++i) {
            const double x0 = (x.data[i] - sb_t * eps.data[i]) / sa_t;
            x.data[i] = sa_p * x0 + sb_p * eps.data[i];
        }
    }
    return x;
}

}  // namespace actflow::diffusion
