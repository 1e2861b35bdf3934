#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"

namespace actflow::diffusion {

// DDPM noise schedule. alpha_bars[t] is the cumulative product of
// (1 - beta) up to and including t; strictly decreasing.
struct NoiseSchedule {
    int64_t T = 0;
    std::vector<double> betas;
    std::vector<double> alpha_bars;

    static NoiseSchedule linear(int64_t T = 1000, double beta_lo = 1e-4,
                                double beta_hi = 2e-2) {
        if (T < 1) {
            throw ConfigError("schedule length must be >= 1");
        }
        NoiseSchedule s;
        s.T = T;
        s.betas.resize(static_cast<size_t>(T));
        s.alpha_bars.resize(static_cast<size_t>(T));
        double prod = 1.0;
        for (int64_t t = 0; t < T; ++t) {
            const double beta =
                T == 1 ? beta_lo
                       : beta_lo + (beta_hi - beta_lo) * static_cast<double>(t) /
                                       static_cast<double>(T - 1);
            prod *= 1.0 - beta;
            s.betas[static_cast<size_t>(t)] = beta;
            s.alpha_bars[static_cast<size_t>(t)] = prod;
        }
        return s;
    }
};

inline codec::LatentGrid sample_noise_like(const codec::LatentGrid& shape, Rng& rng) {
    codec::LatentGrid n(shape.t, shape.h, shape.w, shape.c, shape.f_t, shape.f_s);
    for (double& x : n.data) x = rng.normal();
    return n;
}

// Forward noising: sqrt(abar_t) * l0 + sqrt(1 - abar_t) * noise.
inline codec::LatentGrid q_sample(const codec::LatentGrid& l0,
                                  const NoiseSchedule& sched, int64_t t,
                                  const codec::LatentGrid& noise) {
    if (t < 0 || t >= sched.T) {
        throw ContractError("timestep out of range: " + std::to_string(t));
    }
    if (!l0.same_shape(noise)) {
        throw ContractError("noise shape does not match latent");
    }
    const double ab = sched.alpha_bars[static_cast<size_t>(t)];
    const double a = std::sqrt(ab);
    const double b = std::sqrt(1.0 - ab);
    codec::LatentGrid out(l0.t, l0.h, l0.w, l0.c, l0.f_t, l0.f_s);
    for (size_t i = 0; i < l0.data.size(); ++i) {
        out.data[i] = a * l0.data[i] + b * noise.data[i];
    }
    return out;
}

// MSE between the added noise and the model's prediction. `model` is any
// callable (input, t) -> LatentGrid with the noise latent's shape.
template <typename ModelFn, typename InputT>
double denoising_loss(ModelFn&& model, const InputT& conditioned_input, int64_t t,
                      const codec::LatentGrid& noise) {
    codec::LatentGrid pred = model(conditioned_input, t);
    if (!pred.same_shape(noise)) {
        throw ContractError("model prediction shape does not match noise target");
    }
    double acc = 0.0;
    for (size_t i = 0; i < noise.data.size(); ++i) {
        const double d = pred.data[i] - noise.data[i];
        acc += d * d;
    }
    const double loss = acc / static_cast<double>(noise.data.size());
    if (!std::isfinite(loss)) {
        throw NumericError("non-finite denoising loss at t=" + std::to_string(t));
    }
    return loss;
}

}  // namespace actflow::diffusion
