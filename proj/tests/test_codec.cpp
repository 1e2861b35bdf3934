#include <gtest/gtest.h>

#include "actflow/codec/codec.hpp"
#include "actflow/core/rng.hpp"

using namespace actflow;
using codec::Codec;
using codec::LatentGrid;

namespace {

VideoTensor random_video(int64_t t, int64_t h, int64_t w, uint64_t seed) {
    VideoTensor v(t, h, w);
    Rng rng(seed);
    for (double& x : v.data) x = rng.uniform();
    return v;
}

}  // namespace

TEST(Codec, PaperShapeLaw) {
    // T=8, H=W=32, f_t=4, f_s=8 -> 2 x 4 x 4 x 768
    Codec c(4, 8);
    auto l = c.encode_video(random_video(8, 32, 32, 1));
    EXPECT_EQ(l.t, 2);
    EXPECT_EQ(l.h, 4);
    EXPECT_EQ(l.w, 4);
    EXPECT_EQ(l.c, 768);
}

TEST(Codec, ToyDefaultShapeLaw) {
    // T=8, H=W=32, f_t=2, f_s=4 -> 4 x 8 x 8 x 96
    Codec c(2, 4);
    auto l = c.encode_video(random_video(8, 32, 32, 2));
    EXPECT_EQ(l.t, 4);
    EXPECT_EQ(l.h, 8);
    EXPECT_EQ(l.w, 8);
    EXPECT_EQ(l.c, 96);
}

TEST(Codec, RoundTripBitExact) {
    for (auto [ft, fs, t, h, w] : {std::tuple{2, 4, 8, 32, 32}, std::tuple{4, 8, 8, 32, 32},
                                   std::tuple{1, 2, 3, 8, 12}, std::tuple{2, 1, 4, 5, 7}}) {
        Codec c(ft, fs);
        VideoTensor v = random_video(t, h, w, static_cast<uint64_t>(t * h + w));
        VideoTensor back = c.decode(c.encode_video(v));
        ASSERT_EQ(back.data.size(), v.data.size());
        for (size_t i = 0; i < v.data.size(); ++i) {
            ASSERT_EQ(back.data[i], v.data[i]);
        }
    }
}

TEST(Codec, NonDivisibleDimsRejected) {
    Codec c(2, 4);
    EXPECT_THROW(c.encode_video(random_video(7, 32, 32, 3)), ShapeError);
    EXPECT_THROW(c.encode_video(random_video(8, 30, 32, 3)), ShapeError);
    ImageTensor img(30, 32);
    EXPECT_THROW(c.encode_image(img), ShapeError);
}

TEST(Codec, ImageShapeLawAndReplication) {
    // 32x32 image, f_t=2, f_s=4 -> 1 x 8 x 8 x 96
    Codec c(2, 4);
    ImageTensor img(32, 32);
    Rng rng(4);
    for (double& x : img.data) x = rng.uniform();
    auto l = c.encode_image(img);
    EXPECT_EQ(l.t, 1);
    EXPECT_EQ(l.h, 8);
    EXPECT_EQ(l.w, 8);
    EXPECT_EQ(l.c, 96);
    // replication: temporal sub-slot blocks are identical
    const int64_t block = l.c / c.f_t();
    for (int64_t y = 0; y < l.h; ++y)
        for (int64_t x = 0; x < l.w; ++x)
            for (int64_t b = 0; b < block; ++b) {
                ASSERT_EQ(l.at(0, y, x, b), l.at(0, y, x, block + b));
            }
}

TEST(Codec, ImageEncodeIsFunctionOfThatFrameOnly) {
    Codec c(2, 4);
    VideoTensor v1 = random_video(8, 32, 32, 7);
    VideoTensor v2 = random_video(8, 32, 32, 8);
    const int64_t k = 3;
    // overwrite frame k of v2 with frame k of v1
    for (int64_t y = 0; y < 32; ++y)
        for (int64_t x = 0; x < 32; ++x)
            for (int ch = 0; ch < 3; ++ch) v2.at(k, y, x, ch) = v1.at(k, y, x, ch);
    auto a = c.encode_image(frame_of(v1, k));
    auto b = c.encode_image(frame_of(v2, k));
    EXPECT_EQ(a.data, b.data);
}

TEST(Codec, IdenticalImagesIdenticalLatents) {
    Codec c(2, 4);
    ImageTensor img(32, 32);
    Rng rng(9);
    for (double& x : img.data) x = rng.uniform();
    ImageTensor img2 = img;
    EXPECT_EQ(c.encode_image(img).data, c.encode_image(img2).data);
}

TEST(PadImageLatent, Laws) {
    Codec c(2, 4);
    ImageTensor img(32, 32);
    Rng rng(10);
    for (double& x : img.data) x = rng.uniform();
    auto li = c.encode_image(img);

    // target 1 -> identity
    auto p1 = codec::pad_image_latent(li, 1);
    EXPECT_EQ(p1.data, li.data);

    // target 4 -> slot 0 bit-equal, slots 1..3 zero
    auto p4 = codec::pad_image_latent(li, 4);
    EXPECT_EQ(p4.t, 4);
    for (int64_t y = 0; y < li.h; ++y)
        for (int64_t x = 0; x < li.w; ++x)
            for (int64_t ch = 0; ch < li.c; ++ch) {
                ASSERT_EQ(p4.at(0, y, x, ch), li.at(0, y, x, ch));
                for (int64_t t = 1; t < 4; ++t) ASSERT_EQ(p4.at(t, y, x, ch), 0.0);
            }

    // zero padding adds nothing to the absolute sum
    double sum_in = 0.0, sum_out = 0.0;
    for (double x : li.data) sum_in += std::abs(x);
    for (double x : p4.data) sum_out += std::abs(x);
    EXPECT_DOUBLE_EQ(sum_in, sum_out);

    EXPECT_THROW(codec::pad_image_latent(li, 0), ContractError);
    EXPECT_THROW(codec::pad_image_latent(p4, 2), ContractError);  // not single-slot
}

TEST(Codec, DecodeLinearityBeforeClamp) {
    Codec c(2, 4);
    Rng rng(11);
    LatentGrid l(4, 8, 8, 96, 2, 4);
    for (double& x : l.data) x = rng.normal();
    const double a = -1.7;
    LatentGrid scaled = l;
    for (double& x : scaled.data) x *= a;
    VideoTensor left = c.decode(scaled);
    VideoTensor right = c.decode(l);
    for (size_t i = 0; i < left.data.size(); ++i) {
        ASSERT_NEAR(left.data[i], a * right.data[i], 1e-15);
    }
}

TEST(Codec, ZeroLatentDecodesBlack) {
    Codec c(2, 4);
    LatentGrid l(4, 8, 8, 96, 2, 4);
    auto v = c.decode(l);
    for (double x : v.data) ASSERT_EQ(x, 0.0);
}

TEST(Codec, DecodeDisplayClampsAndFlags) {
    Codec c(1, 1);
    LatentGrid l(1, 2, 2, 3, 1, 1);
    l.data[0] = -0.5;
    l.data[1] = 1.5;
    l.data[2] = 0.25;
    auto out = c.decode_display(l);
    EXPECT_TRUE(out.clamped);
    EXPECT_EQ(out.video.data[0], 0.0);
    EXPECT_EQ(out.video.data[1], 1.0);
    EXPECT_EQ(out.video.data[2], 0.25);

    LatentGrid in_range(1, 2, 2, 3, 1, 1);
    for (double& x : in_range.data) x = 0.5;
    EXPECT_FALSE(c.decode_display(in_range).clamped);
}

TEST(Codec, LocalityOneFrameOneSlot) {
    Codec c(2, 4);
    VideoTensor v = random_video(8, 32, 32, 12);
    auto base = c.encode_video(v);
    v.at(5, 10, 10, 1) += 0.125;  // frame 5 -> slot 2
    auto changed = c.encode_video(v);
    for (int64_t t = 0; t < base.t; ++t) {
        bool slot_differs = false;
        for (int64_t y = 0; y < base.h && !slot_differs; ++y)
            for (int64_t x = 0; x < base.w && !slot_differs; ++x)
                for (int64_t ch = 0; ch < base.c; ++ch)
                    if (base.at(t, y, x, ch) != changed.at(t, y, x, ch)) {
                        slot_differs = true;
                        break;
                    }
        EXPECT_EQ(slot_differs, t == 2);
    }
}

TEST(Codec, ChannelSliceConcatRoundTrip) {
    Rng rng(13);
    LatentGrid l(2, 4, 4, 6, 1, 1);
    for (double& x : l.data) x = rng.normal();
    auto a = codec::slice_channels(l, 0, 3);
    auto b = codec::slice_channels(l, 3, 3);
    auto back = codec::concat_channels(a, b);
    EXPECT_EQ(back.data, l.data);
    EXPECT_THROW(codec::slice_channels(l, 4, 3), ShapeError);
}
