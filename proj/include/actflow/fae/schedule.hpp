#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/diffusion/sampler.hpp"

namespace actflow::fae {

// (alpha, t_l, t_h, T) governing the timestep-scheduled attention bias.
// Note the naming: t_l is the LOW-FREQUENCY boundary and sits above t_h
// (defaults t_l=800 > t_h=700), because large timesteps carry the
// low-frequency content.
struct BiasScheduleParams {
    double alpha = 1.0;
    double t_low_freq = 800.0;   // t_l
    double t_high_freq = 700.0;  // t_h
    double horizon = 1000.0;     // T

    void validate() const {
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
            throw ConfigError("bias strength alpha must be finite and >= 0");
        }
        if (!(0.0 <= t_high_freq && t_high_freq < t_low_freq && t_low_freq <= horizon)) {
            throw ConfigError("schedule requires 0 <= t_h < t_l <= T");
        }
    }
};

enum class ScheduleVariant {
    cosine_transition,  // default: smooth transition on [t_h, t_l]
    step_at_low,        // no transition, step at t_l
    step_at_high,       // no transition, step at t_h
};

inline std::string to_string(ScheduleVariant v) {
    switch (v) {
        case ScheduleVariant::cosine_transition: return "cosine";
        case ScheduleVariant::step_at_low: return "step-low";
        case ScheduleVariant::step_at_high: return "step-high";
    }
    throw ConfigError("invalid schedule variant value");
}

inline ScheduleVariant schedule_variant_from_string(const std::string& s) {
    if (s == "cosine") return ScheduleVariant::cosine_transition;
    if (s == "step-low") return ScheduleVariant::step_at_low;
    if (s == "step-high") return ScheduleVariant::step_at_high;
    throw ConfigError("unknown schedule variant: " + s);
}

// Scheduled bias value:
//   alpha                                            t_l <= t <= T
//   alpha/2 * (cos(pi / (t_h - t_l) * (t - t_l)) + 1)  t_h <= t < t_l
//   0                                                0 <= t < t_h
inline double w_bias(double t, const BiasScheduleParams& p,
                     ScheduleVariant variant = ScheduleVariant::cosine_transition) {
    p.validate();
    if (!(t >= 0.0 && t <= p.horizon)) {
        throw ContractError("timestep outside [0, T]");
    }
    switch (variant) {
        case ScheduleVariant::step_at_low:
            return t >= p.t_low_freq ? p.alpha : 0.0;
        case ScheduleVariant::step_at_high:
            return t >= p.t_high_freq ? p.alpha : 0.0;
        case ScheduleVariant::cosine_transition:
            break;
    }
    if (t >= p.t_low_freq) return p.alpha;
    if (t < p.t_high_freq) return 0.0;
    return p.alpha / 2.0 *
           (std::cos(M_PI / (p.t_high_freq - p.t_low_freq) * (t - p.t_low_freq)) + 1.0);
}

// Closure for the sampler; with alpha = 0 this is the zero hook.
inline diffusion::BiasHook bias_hook(
    const BiasScheduleParams& p,
    ScheduleVariant variant = ScheduleVariant::cosine_transition) {
    p.validate();
    return [p, variant](int64_t t) { return w_bias(static_cast<double>(t), p, variant); };
}

// (t, w_bias) table over integer timesteps 0..T for schedule dumps.
inline std::vector<std::pair<int64_t, double>> schedule_table(
    const BiasScheduleParams& p,
    ScheduleVariant variant = ScheduleVariant::cosine_transition) {
    p.validate();
    std::vector<std::pair<int64_t, double>> rows;
    const int64_t T = static_cast<int64_t>(p.horizon);
    rows.reserve(static_cast<size_t>(T + 1));
    for (int64_t t = 0; t <= T; ++t) {
        rows.emplace_back(t, w_bias(static_cast<double>(t), p, variant));
    }
    return rows;
}

}  // namespace actflow::fae
