#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/core/video.hpp"

namespace actflow::codec {

// Compressed latent array. For a video encode T' = T/f_t, H' = H/f_s,
// W' = W/f_s and C = 3 * f_t * f_s^2; image encodes keep T' = 1.
struct LatentGrid {
    int64_t t = 0;  // T'
    int64_t h = 0;  // H'
    int64_t w = 0;  // W'
    int64_t c = 0;
    int f_t = 1;
    int f_s = 1;
    std::vector<double> data;  // [T', H', W', C] row-major

    LatentGrid() = default;
    LatentGrid(int64_t t_, int64_t h_, int64_t w_, int64_t c_, int ft, int fs)
        : t(t_), h(h_), w(w_), c(c_), f_t(ft), f_s(fs),
          data(static_cast<size_t>(t_ * h_ * w_ * c_), 0.0) {}

    double& at(int64_t tt, int64_t yy, int64_t xx, int64_t cc) {
        return data[static_cast<size_t>(((tt * h + yy) * w + xx) * c + cc)];
    }
    double at(int64_t tt, int64_t yy, int64_t xx, int64_t cc) const {
        return data[static_cast<size_t>(((tt * h + yy) * w + xx) * c + cc)];
    }
    size_t size() const { return data.size(); }
    bool same_shape(const LatentGrid& o) const {
        return t == o.t && h == o.h && w == o.w && c == o.c;
    }
};

// Deterministic lossless latent codec: space-to-depth over time and space.
// Channel packing order within a latent cell is (dt, dy, dx, rgb), dt major.
class Codec {
public:
    Codec(int f_t, int f_s) : f_t_(f_t), f_s_(f_s) {
        if (f_t < 1 || f_s < 1) {
            throw ConfigError("compression factors must be >= 1");
        }
    }

    int f_t() const { return f_t_; }
    int f_s() const { return f_s_; }
    int64_t channels() const { return 3LL * f_t_ * f_s_ * f_s_; }

    LatentGrid encode_video(const VideoTensor& v) const {
        if (v.frames < 1 || v.frames % f_t_ != 0) {
            throw ShapeError("frame count " + std::to_string(v.frames) +
                             " not divisible by f_t=" + std::to_string(f_t_));
        }
        if (v.height % f_s_ != 0 || v.width % f_s_ != 0) {
            throw ShapeError("spatial dims not divisible by f_s=" + std::to_string(f_s_));
        }
        LatentGrid l(v.frames / f_t_, v.height / f_s_, v.width / f_s_, channels(), f_t_, f_s_);
        for (int64_t tt = 0; tt < l.t; ++tt)
            for (int64_t yy = 0; yy < l.h; ++yy)
                for (int64_t xx = 0; xx < l.w; ++xx)
                    for (int dt = 0; dt < f_t_; ++dt)
                        for (int dy = 0; dy < f_s_; ++dy)
                            for (int dx = 0; dx < f_s_; ++dx)
                                for (int rgb = 0; rgb < 3; ++rgb) {
                                    int64_t ch = ((static_cast<int64_t>(dt) * f_s_ + dy) * f_s_ + dx) * 3 + rgb;
                                    l.at(tt, yy, xx, ch) =
                                        v.at(tt * f_t_ + dt, yy * f_s_ + dy, xx * f_s_ + dx, rgb);
                                }
        return l;
    }

    // The single frame is replicated across the f_t temporal sub-slots so the
    // image latent shares the video latent's channel count.
    LatentGrid encode_image(const ImageTensor& img) const {
        if (img.height % f_s_ != 0 || img.width % f_s_ != 0) {
            throw ShapeError("spatial dims not divisible by f_s=" + std::to_string(f_s_));
        }
        LatentGrid l(1, img.height / f_s_, img.width / f_s_, channels(), f_t_, f_s_);
        for (int64_t yy = 0; yy < l.h; ++yy)
            for (int64_t xx = 0; xx < l.w; ++xx)
                for (int dt = 0; dt < f_t_; ++dt)
                    for (int dy = 0; dy < f_s_; ++dy)
                        for (int dx = 0; dx < f_s_; ++dx)
                            for (int rgb = 0; rgb < 3; ++rgb) {
                                int64_t ch = ((static_cast<int64_t>(dt) * f_s_ + dy) * f_s_ + dx) * 3 + rgb;
                                l.at(0, yy, xx, ch) = img.at(yy * f_s_ + dy, xx * f_s_ + dx, rgb);
                            }
        return l;
    }

    // Exact inverse rearrangement, no clamping. Out-of-range values pass
    // through untouched (denoised latents are not guaranteed to be in [0,1]).
    VideoTensor decode(const LatentGrid& l) const {
        if (l.f_t != f_t_ || l.f_s != f_s_) {
            throw ShapeError("latent factors do not match codec configuration");
        }
        if (l.c != channels()) {
            throw ShapeError("latent channel count " + std::to_string(l.c) +
                             " inconsistent with factors (expected " +
                             std::to_string(channels()) + ")");
        }
        VideoTensor v(l.t * f_t_, l.h * f_s_, l.w * f_s_);
        for (int64_t tt = 0; tt < l.t; ++tt)
            for (int64_t yy = 0; yy < l.h; ++yy)
                for (int64_t xx = 0; xx < l.w; ++xx)
                    for (int dt = 0; dt < f_t_; ++dt)
                        for (int dy = 0; dy < f_s_; ++dy)
                            for (int dx = 0; dx < f_s_; ++dx)
                                for (int rgb = 0; rgb < 3; ++rgb) {
                                    int64_t ch = ((static_cast<int64_t>(dt) * f_s_ + dy) * f_s_ + dx) * 3 + rgb;
                                    v.at(tt * f_t_ + dt, yy * f_s_ + dy, xx * f_s_ + dx, rgb) =
                                        l.at(tt, yy, xx, ch);
                                }
        return v;
    }

    struct Decoded {
        VideoTensor video;
        bool clamped = false;  // true if any value was clipped to [0,1]
    };

    // Display-path decode: values clamped to [0,1], clamping flagged.
    Decoded decode_display(const LatentGrid& l) const {
        Decoded out{decode(l), false};
        for (double& x : out.video.data) {
            if (x < 0.0) {
                x = 0.0;
                out.clamped = true;
            } else if (x > 1.0) {
                x = 1.0;
                out.clamped = true;
            }
        }
        return out;
    }
};

inline LatentGrid concat_channels(const LatentGrid& a, const LatentGrid& b) {
    if (a.t != b.t || a.h != b.h || a.w != b.w) {
        throw ShapeError("channel concat requires matching grid dims");
    }
    LatentGrid out(a.t, a.h, a.w, a.c + b.c, a.f_t, a.f_s);
    for (int64_t tt = 0; tt < a.t; ++tt)
        for (int64_t y = 0; y < a.h; ++y)
            for (int64_t x = 0; x < a.w; ++x) {
                for (int64_t c = 0; c < a.c; ++c) out.at(tt, y, x, c) = a.at(tt, y, x, c);
                for (int64_t c = 0; c < b.c; ++c)
                    out.at(tt, y, x, a.c + c) = b.at(tt, y, x, c);
            }
    return out;
}

inline LatentGrid slice_channels(const LatentGrid& l, int64_t c0, int64_t n) {
    if (c0 < 0 || c0 + n > l.c) {
        throw ShapeError("channel slice out of range");
    }
    LatentGrid out(l.t, l.h, l.w, n, l.f_t, l.f_s);
    for (int64_t tt = 0; tt < l.t; ++tt)
        for (int64_t y = 0; y < l.h; ++y)
            for (int64_t x = 0; x < l.w; ++x)
                for (int64_t c = 0; c < n; ++c)
                    out.at(tt, y, x, c) = l.at(tt, y, x, c0 + c);
    return out;
}

// Zero-pad an image latent (T' = 1) along the temporal dimension: slot 0 is
// the input, slots 1..target-1 are zeros.
inline LatentGrid pad_image_latent(const LatentGrid& li, int64_t target_t) {
    if (li.t != 1) {
        throw ContractError("pad_image_latent expects a single-slot image latent");
    }
    if (target_t < 1) {
        throw ContractError("pad target must be >= 1");
    }
    LatentGrid out(target_t, li.h, li.w, li.c, li.f_t, li.f_s);
    std::copy(li.data.begin(), li.data.end(), out.data.begin());
    return out;
}

}  // namespace actflow::codec
