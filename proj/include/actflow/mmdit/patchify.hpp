#pragma once

#include <cstdint>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/nn/mat.hpp"

namespace actflow::mmdit {

// Latent-to-token rearrangement over spatial patches. Token order is
// (slot, grid_y, grid_x); within a token the layout is (dy, dx, channel).
// Bijective with unpatchify.
template <typename Real>
nn::Mat<Real> patchify(const codec::LatentGrid& l, int64_t patch) {
    if (patch < 1 || l.h % patch != 0 || l.w % patch != 0) {
        throw ShapeError("latent spatial dims not divisible by patch size");
    }
    const int64_t gh = l.h / patch, gw = l.w / patch;
    nn::Mat<Real> out(l.t * gh * gw, l.c * patch * patch);
    for (int64_t tt = 0; tt < l.t; ++tt)
        for (int64_t gy = 0; gy < gh; ++gy)
            for (int64_t gx = 0; gx < gw; ++gx) {
                const int64_t row = (tt * gh + gy) * gw + gx;
                for (int64_t dy = 0; dy < patch; ++dy)
                    for (int64_t dx = 0; dx < patch; ++dx)
                        for (int64_t ch = 0; ch < l.c; ++ch) {
                            out.at(row, (dy * patch + dx) * l.c + ch) = static_cast<Real>(
                                l.at(tt, gy * patch + dy, gx * patch + dx, ch));
                        }
            }
    return out;
}

template <typename Real>
codec::LatentGrid unpatchify(const nn::Mat<Real>& tokens, int64_t patch, int64_t t,
                             int64_t h, int64_t w, int64_t c, int f_t, int f_s) {
    const int64_t gh = h / patch, gw = w / patch;
    if (tokens.rows != t * gh * gw || tokens.cols != c * patch * patch) {
        throw ShapeError("token array shape inconsistent with latent geometry");
    }
    codec::LatentGrid l(t, h, w, c, f_t, f_s);
    for (int64_t tt = 0; tt < t; ++tt)
        for (int64_t gy = 0; gy < gh; ++gy)
            for (int64_t gx = 0; gx < gw; ++gx) {
                const int64_t row = (tt * gh + gy) * gw + gx;
                for (int64_t dy = 0; dy < patch; ++dy)
                    for (int64_t dx = 0; dx < patch; ++dx)
                        for (int64_t ch = 0; ch < c; ++ch) {
                            l.at(tt, gy * patch + dy, gx * patch + dx, ch) =
                                static_cast<double>(tokens.at(row, (dy * patch + dx) * c + ch));
                        }
            }
    return l;
}

}  // namespace actflow::mmdit
