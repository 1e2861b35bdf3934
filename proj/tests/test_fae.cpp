#include <gtest/gtest.h>

#include <cmath>

#include "actflow/fae/fae.hpp"
#include "actflow/fae/schedule.hpp"

using namespace actflow;
using fae::BiasScheduleParams;
using fae::ScheduleVariant;
using fae::w_bias;

TEST(WBias, PaperDefaults) {
    BiasScheduleParams p;  // alpha=1, t_l=800, t_h=700, T=1000
    EXPECT_DOUBLE_EQ(w_bias(900, p), 1.0);
    EXPECT_DOUBLE_EQ(w_bias(650, p), 0.0);
    EXPECT_NEAR(w_bias(750, p), 0.5, 1e-12);  // cosine midpoint
    EXPECT_DOUBLE_EQ(w_bias(1000, p), 1.0);
    EXPECT_DOUBLE_EQ(w_bias(0, p), 0.0);
}

TEST(WBias, BoundaryContinuity) {
    BiasScheduleParams p;
    // approaching t_l from below -> alpha; at t_h exactly -> 0
    EXPECT_NEAR(w_bias(800.0 - 1e-9, p), 1.0, 1e-6);
    EXPECT_NEAR(w_bias(700.0, p), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(w_bias(800.0, p), 1.0);
    // continuity at both boundaries within 1e-9
    EXPECT_NEAR(w_bias(800.0 - 1e-12, p), w_bias(800.0, p), 1e-9);
    EXPECT_NEAR(w_bias(700.0 + 1e-12, p), w_bias(700.0 - 0.0, p), 1e-9);
}

TEST(WBias, MonotoneNondecreasingOnTransition) {
    BiasScheduleParams p;
    p.alpha = 2.5;
    double prev = -1.0;
    for (double t = 700.0; t <= 800.0; t += 0.5) {
        const double w = w_bias(t, p);
        ASSERT_GE(w, prev - 1e-15);
        ASSERT_GE(w, 0.0);
        ASSERT_LE(w, p.alpha);
        prev = w;
    }
}

TEST(WBias, ScalesWithAlpha) {
    BiasScheduleParams p;
    p.alpha = 3.0;
    EXPECT_DOUBLE_EQ(w_bias(900, p), 3.0);
    EXPECT_NEAR(w_bias(750, p), 1.5, 1e-12);
    p.alpha = 0.0;
    for (double t : {0.0, 500.0, 750.0, 900.0, 1000.0}) {
        EXPECT_DOUBLE_EQ(w_bias(t, p), 0.0);
    }
}

TEST(WBias, ParamValidation) {
    BiasScheduleParams p;
    p.t_high_freq = 800;
    p.t_low_freq = 700;  // inverted
    EXPECT_THROW(w_bias(500, p), ConfigError);
    BiasScheduleParams q;
    q.t_low_freq = 1100;  // above T
    EXPECT_THROW(w_bias(500, q), ConfigError);
    BiasScheduleParams ok;
    EXPECT_THROW(w_bias(-1, ok), ContractError);
    EXPECT_THROW(w_bias(1001, ok), ContractError);
}

TEST(WBias, StepVariantsClosedForm) {
    BiasScheduleParams p;
    for (int64_t t = 0; t <= 1000; ++t) {
        const double lo = w_bias(static_cast<double>(t), p, ScheduleVariant::step_at_low);
        const double hi = w_bias(static_cast<double>(t), p, ScheduleVariant::step_at_high);
        ASSERT_DOUBLE_EQ(lo, t >= 800 ? 1.0 : 0.0);
        ASSERT_DOUBLE_EQ(hi, t >= 700 ? 1.0 : 0.0);
    }
}

TEST(BiasHook, EvaluatesSchedule) {
    BiasScheduleParams p;
    auto hook = fae::bias_hook(p);
    EXPECT_DOUBLE_EQ(hook(999), 1.0);
    EXPECT_DOUBLE_EQ(hook(500), 0.0);
    EXPECT_NEAR(hook(750), 0.5, 1e-12);

    p.alpha = 0.0;
    auto zero = fae::bias_hook(p);
    for (int64_t t : {0, 100, 750, 999}) {
        EXPECT_DOUBLE_EQ(zero(t), 0.0);
    }
}

TEST(ScheduleTable, CoversAllIntegerTimesteps) {
    BiasScheduleParams p;
    auto rows = fae::schedule_table(p);
    ASSERT_EQ(rows.size(), 1001u);
    EXPECT_EQ(rows.front().first, 0);
    EXPECT_EQ(rows.back().first, 1000);
    for (const auto& [t, w] : rows) {
        ASSERT_DOUBLE_EQ(w, w_bias(static_cast<double>(t), p));
    }
}

namespace {

VideoTensor random_video(int64_t t, int64_t h, int64_t w, uint64_t seed) {
    VideoTensor v(t, h, w);
    Rng rng(seed);
    for (double& x : v.data) x = rng.uniform();
    return v;
}

}  // namespace

TEST(RandomCrop, FullAreaIsIdentity) {
    auto v = random_video(4, 16, 16, 1);
    Rng rng(2);
    auto crop = fae::random_crop(v, rng, 1.0);
    EXPECT_EQ(crop.info.crop_h, 16);
    EXPECT_EQ(crop.info.crop_w, 16);
    ASSERT_EQ(crop.video.data.size(), v.data.size());
    for (size_t i = 0; i < v.data.size(); ++i) {
        ASSERT_NEAR(crop.video.data[i], v.data[i], 1e-12);
    }
}

TEST(RandomCrop, OutputResolutionPreserved) {
    auto v = random_video(4, 24, 20, 3);
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        auto crop = fae::random_crop(v, rng, 0.5);
        ASSERT_EQ(crop.video.frames, 4);
        ASSERT_EQ(crop.video.height, 24);
        ASSERT_EQ(crop.video.width, 20);
    }
}

TEST(RandomCrop, OffsetsIdenticalAcrossFramesOverManyDraws) {
    auto v = random_video(6, 16, 16, 5);
    Rng rng(6);
    for (int draw = 0; draw < 1000; ++draw) {
        auto crop = fae::random_crop(v, rng, 0.6);
        ASSERT_EQ(crop.info.y0.size(), 6u);
        for (size_t t = 1; t < 6; ++t) {
            ASSERT_EQ(crop.info.y0[t], crop.info.y0[0]);
            ASSERT_EQ(crop.info.x0[t], crop.info.x0[0]);
        }
        // area covenant
        ASSERT_GE(static_cast<double>(crop.info.crop_h * crop.info.crop_w),
                  0.6 * 16 * 16 - 1e-9);
    }
}

TEST(RandomCrop, ContractAndDegenerateErrors) {
    auto v = random_video(2, 16, 16, 7);
    Rng rng(8);
    EXPECT_THROW(fae::random_crop(v, rng, 0.0), ContractError);
    EXPECT_THROW(fae::random_crop(v, rng, 1.5), ContractError);
    // a 2x2 video cannot produce a window of one 4-pixel latent cell
    auto tiny = random_video(2, 2, 2, 9);
    EXPECT_THROW(fae::random_crop(tiny, rng, 0.1, 4), DegenerateInputError);
}

TEST(FrequencyEmbeddingInit, GeometryAndValidation) {
    Rng rng(10);
    auto e = fae::FrequencyEmbedding<double>::init(3, 8, 32, "ref-a", 0.02, rng);
    EXPECT_EQ(e.layers, 3);
    EXPECT_EQ(e.tokens, 8);
    EXPECT_EQ(e.dim, 32);
    EXPECT_EQ(e.params.size(), 3u);
    EXPECT_THROW(fae::FrequencyEmbedding<double>::init(0, 8, 32, "x", 0.02, rng),
                 ConfigError);
}

TEST(ExtractAttentionMaps, ShapesAndMass) {
    mmdit::ModelConfig cfg;
    cfg.dim = 16;
    cfg.layers = 2;
    cfg.heads = 2;
    cfg.patch = 2;
    cfg.prompt_vocab = 8;
    cfg.prompt_len = 2;
    cfg.mlp_hidden = 24;
    codec::Codec codec(2, 4);
    mmdit::LatentShape latent{2, 2, 2, 96, 2, 4};  // 4-frame 8x8 video
    Rng rng(11);
    auto model = mmdit::Model<double>::init(cfg, latent, rng);
    Rng rng2(12);
    auto freq = fae::FrequencyEmbedding<double>::init(2, 4, 16, "ref", 0.3, rng2);
    auto sched = diffusion::NoiseSchedule::linear(1000);
    auto video = random_video(4, 8, 8, 13);

    auto maps = fae::extract_attention_maps(model, freq, video, {1, 2}, {800, 200},
                                            codec, sched, 99);
    ASSERT_EQ(maps.size(), 2u);
    for (const auto& m : maps) {
        EXPECT_EQ(m.slots, 2);
        EXPECT_EQ(m.grid_h, 1);
        EXPECT_EQ(m.grid_w, 1);
        ASSERT_EQ(m.values.size(), 2u);
        for (double v : m.values) {
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
        }
    }
    EXPECT_EQ(maps[0].timestep, 800);
    EXPECT_EQ(maps[1].timestep, 200);

    EXPECT_THROW(fae::extract_attention_maps(model, freq, video, {1, 2}, {1000},
                                             codec, sched, 99),
                 ContractError);
}

TEST(MotionRegionMask, MarksSpriteSweep) {
    // 8x8 video, f_t=2, f_s=2, patch=2: token cell = 4x4 pixels, grid 2x2
    std::vector<std::vector<double>> masks(4, std::vector<double>(64, 0.0));
    // sprite occupies top-left quadrant in frames 0-1, bottom-right in 2-3
    for (int f = 0; f < 2; ++f)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) masks[static_cast<size_t>(f)][static_cast<size_t>(y * 8 + x)] = 1.0;
    for (int f = 2; f < 4; ++f)
        for (int y = 4; y < 8; ++y)
            for (int x = 4; x < 8; ++x) masks[static_cast<size_t>(f)][static_cast<size_t>(y * 8 + x)] = 1.0;

    auto mask = fae::motion_region_token_mask(masks, 8, 8, 2, 2, 2);
    ASSERT_EQ(mask.size(), 8u);  // 2 slots x 2x2 grid
    // slot 0: only top-left cell; slot 1: only bottom-right cell
    EXPECT_EQ(mask[0], 1);
    EXPECT_EQ(mask[1], 0);
    EXPECT_EQ(mask[2], 0);
    EXPECT_EQ(mask[3], 0);
    EXPECT_EQ(mask[4], 0);
    EXPECT_EQ(mask[5], 0);
    EXPECT_EQ(mask[6], 0);
    EXPECT_EQ(mask[7], 1);

    fae::AttentionMap map;
    map.slots = 2;
    map.grid_h = 2;
    map.grid_w = 2;
    map.values = {0.4, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.4};
    EXPECT_NEAR(fae::attention_fraction_in_region(map, mask), 0.8 / 1.4, 1e-12);
}
