#include <gtest/gtest.h>

#include <cmath>

#include "actflow/diffusion/sampler.hpp"
#include "actflow/diffusion/schedule.hpp"

using namespace actflow;
using diffusion::NoiseSchedule;

TEST(NoiseSchedule, MonotoneAlphaBars) {
    auto s = NoiseSchedule::linear();
    ASSERT_EQ(s.T, 1000);
    EXPECT_GT(s.alpha_bars[0], 0.999);  // close to 1 at t=0
    for (int64_t t = 1; t < s.T; ++t) {
        ASSERT_LT(s.alpha_bars[static_cast<size_t>(t)],
                  s.alpha_bars[static_cast<size_t>(t - 1)]);
        ASSERT_GT(s.betas[static_cast<size_t>(t)], 0.0);
        ASSERT_LT(s.betas[static_cast<size_t>(t)], 1.0);
    }
}

namespace {

codec::LatentGrid random_latent(int64_t t, int64_t h, int64_t w, int64_t c, Rng& rng) {
    codec::LatentGrid l(t, h, w, c, 1, 1);
    for (double& x : l.data) x = rng.uniform();
    return l;
}

}  // namespace

TEST(QSample, EndpointInterpolation) {
    auto s = NoiseSchedule::linear();
    Rng rng(1);
    auto l0 = random_latent(2, 4, 4, 3, rng);
    auto noise = diffusion::sample_noise_like(l0, rng);

    // t=0: alpha_bar ~ 1 -> output ~ l0
    auto near_clean = diffusion::q_sample(l0, s, 0, noise);
    const double ab0 = s.alpha_bars[0];
    for (size_t i = 0; i < l0.data.size(); ++i) {
        ASSERT_NEAR(near_clean.data[i],
                    std::sqrt(ab0) * l0.data[i] + std::sqrt(1 - ab0) * noise.data[i],
                    1e-15);
    }

    // hand-built schedule hitting the exact endpoints
    NoiseSchedule exact;
    exact.T = 2;
    exact.betas = {0.0, 1.0};
    exact.alpha_bars = {1.0, 0.0};
    auto same = diffusion::q_sample(l0, exact, 0, noise);
    EXPECT_EQ(same.data, l0.data);
    auto pure = diffusion::q_sample(l0, exact, 1, noise);
    EXPECT_EQ(pure.data, noise.data);
}

TEST(QSample, VarianceMatchesClosedForm) {
    // elementwise variance of q_sample ~ abar*Var(l0) + (1-abar) over noise draws
    auto s = NoiseSchedule::linear();
    const int64_t t = 500;
    const double ab = s.alpha_bars[static_cast<size_t>(t)];
    Rng rng(2);
    codec::LatentGrid l0(1, 1, 1, 4, 1, 1);
    for (double& x : l0.data) x = rng.uniform();

    const int kDraws = 10000;
    std::vector<double> sum(4, 0.0), sum2(4, 0.0);
    for (int d = 0; d < kDraws; ++d) {
        auto noise = diffusion::sample_noise_like(l0, rng);
        auto xt = diffusion::q_sample(l0, s, t, noise);
        for (int i = 0; i < 4; ++i) {
            sum[static_cast<size_t>(i)] += xt.data[static_cast<size_t>(i)];
            sum2[static_cast<size_t>(i)] +=
                xt.data[static_cast<size_t>(i)] * xt.data[static_cast<size_t>(i)];
        }
    }
    for (int i = 0; i < 4; ++i) {
        const double mean = sum[static_cast<size_t>(i)] / kDraws;
        const double var = sum2[static_cast<size_t>(i)] / kDraws - mean * mean;
        // Var(l0) = 0 per element (l0 fixed): variance should be 1 - abar
        EXPECT_NEAR(var, 1.0 - ab, 0.05);
        EXPECT_NEAR(mean, std::sqrt(ab) * l0.data[static_cast<size_t>(i)], 0.05);
    }
}

TEST(QSample, ContractErrors) {
    auto s = NoiseSchedule::linear();
    Rng rng(3);
    auto l0 = random_latent(2, 4, 4, 3, rng);
    auto noise = diffusion::sample_noise_like(l0, rng);
    EXPECT_THROW(diffusion::q_sample(l0, s, -1, noise), ContractError);
    EXPECT_THROW(diffusion::q_sample(l0, s, 1000, noise), ContractError);
    auto bad = random_latent(2, 4, 4, 2, rng);
    EXPECT_THROW(diffusion::q_sample(l0, s, 10, bad), ContractError);
}

TEST(DenoisingLoss, KnownValues) {
    auto s = NoiseSchedule::linear();
    Rng rng(4);
    codec::LatentGrid noise(2, 4, 4, 8, 1, 1);
    for (double& x : noise.data) x = rng.normal();

    // model that returns exactly the noise -> loss 0
    auto perfect = [&](const codec::LatentGrid& in, int64_t) { return noise; };
    EXPECT_EQ(diffusion::denoising_loss(perfect, noise, 10, noise), 0.0);

    // model that returns zeros -> loss = mean(noise^2) ~ 1
    auto zeros = [&](const codec::LatentGrid& in, int64_t) {
        codec::LatentGrid z(in.t, in.h, in.w, in.c, in.f_t, in.f_s);
        return z;
    };
    double expect = 0.0;
    for (double x : noise.data) expect += x * x;
    expect /= static_cast<double>(noise.data.size());
    EXPECT_NEAR(diffusion::denoising_loss(zeros, noise, 10, noise), expect, 1e-12);

    // Monte-Carlo: for standard normal noise the zero-model loss ~ 1
    codec::LatentGrid big(4, 8, 8, 32, 1, 1);
    for (double& x : big.data) x = rng.normal();
    EXPECT_NEAR(diffusion::denoising_loss(zeros, big, 10, big), 1.0, 0.05);
}

TEST(DenoisingLoss, PermutationInvariance) {
    Rng rng(5);
    codec::LatentGrid noise(1, 2, 2, 4, 1, 1);
    codec::LatentGrid pred(1, 2, 2, 4, 1, 1);
    for (double& x : noise.data) x = rng.normal();
    for (double& x : pred.data) x = rng.normal();

    auto model_a = [&](const codec::LatentGrid&, int64_t) { return pred; };
    const double base = diffusion::denoising_loss(model_a, noise, 0, noise);

    // consistent reordering of both prediction and target
    codec::LatentGrid noise_r = noise, pred_r = pred;
    std::reverse(noise_r.data.begin(), noise_r.data.end());
    std::reverse(pred_r.data.begin(), pred_r.data.end());
    auto model_b = [&](const codec::LatentGrid&, int64_t) { return pred_r; };
    EXPECT_DOUBLE_EQ(diffusion::denoising_loss(model_b, noise_r, 0, noise_r), base);
}

TEST(DenoisingLoss, NonFiniteSurfacesWithTimestep) {
    codec::LatentGrid noise(1, 1, 1, 2, 1, 1);
    auto nan_model = [&](const codec::LatentGrid& in, int64_t) {
        codec::LatentGrid bad = in;
        bad.data[0] = std::nan("");
        return bad;
    };
    try {
        diffusion::denoising_loss(nan_model, noise, 123, noise);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("123"), std::string::npos);
    }
}

TEST(Sampler, TimestepSubsequence) {
    auto ts = diffusion::sampling_timesteps(1000, 1000);
    ASSERT_EQ(ts.size(), 1000u);
    EXPECT_EQ(ts.front(), 999);
    EXPECT_EQ(ts.back(), 0);
    for (size_t i = 1; i < ts.size(); ++i) ASSERT_EQ(ts[i], ts[i - 1] - 1);

    auto t50 = diffusion::sampling_timesteps(1000, 50);
    ASSERT_EQ(t50.size(), 50u);
    EXPECT_EQ(t50.front(), 999);
    EXPECT_EQ(t50.back(), 0);
    for (size_t i = 1; i < t50.size(); ++i) ASSERT_LT(t50[i], t50[i - 1]);

    EXPECT_THROW(diffusion::sampling_timesteps(1000, 0), ContractError);
    EXPECT_THROW(diffusion::sampling_timesteps(1000, 1001), ContractError);
}

TEST(Sampler, LinearModelMatchesHandRolledUpdate) {
    // model eps(x) = 0.25 * x is deterministic; replay the DDIM update by hand
    auto s = NoiseSchedule::linear(100);
    Rng rng(6);
    codec::LatentGrid x0(1, 2, 2, 3, 1, 1);
    for (double& x : x0.data) x = rng.normal();
    codec::LatentGrid cond = x0;

    auto model = [](const codec::LatentGrid& x, const codec::LatentGrid&, int64_t,
                    double) {
        codec::LatentGrid eps = x;
        for (double& v : eps.data) v *= 0.25;
        return eps;
    };
    auto out = diffusion::sample(model, x0, cond, s, 10);

    auto ts = diffusion::sampling_timesteps(100, 10);
    codec::LatentGrid x = x0;
    for (size_t k = 0; k < ts.size(); ++k) {
        const double ab_t = s.alpha_bars[static_cast<size_t>(ts[k])];
        const double ab_p =
            k + 1 < ts.size() ? s.alpha_bars[static_cast<size_t>(ts[k + 1])] : 1.0;
        for (double& v : x.data) {
            const double eps = 0.25 * v;
            const double x0_hat = (v - std::sqrt(1 - ab_t) * eps) / std::sqrt(ab_t);
            v = std::sqrt(ab_p) * x0_hat + std::sqrt(1 - ab_p) * eps;
        }
    }
    for (size_t i = 0; i < x.data.size(); ++i) {
        ASSERT_DOUBLE_EQ(out.data[i], x.data[i]);
    }
}

TEST(Sampler, HookReceivesTrueDiffusionTimesteps) {
    auto s = NoiseSchedule::linear(100);
    codec::LatentGrid x0(1, 1, 1, 2, 1, 1);
    codec::LatentGrid cond = x0;
    std::vector<int64_t> seen;
    auto model = [&](const codec::LatentGrid& x, const codec::LatentGrid&, int64_t t,
                     double bias) {
        EXPECT_EQ(bias, static_cast<double>(t) * 2.0);
        return x;
    };
    auto hook = [&](int64_t t) {
        seen.push_back(t);
        return static_cast<double>(t) * 2.0;
    };
    diffusion::sample(model, x0, cond, s, 7, hook);
    EXPECT_EQ(seen, diffusion::sampling_timesteps(100, 7));
}
