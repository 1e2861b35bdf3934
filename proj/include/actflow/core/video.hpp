#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "actflow/core/errors.hpp"

namespace actflow {

// Raw pixel video, frames x height x width x RGB, values in [0, 1].
struct VideoTensor {
    int64_t frames = 0;
    int64_t height = 0;
    int64_t width = 0;
    std::vector<double> data;  // [T, H, W, 3] row-major
    double frame_rate = 8.0;   // informational

    VideoTensor() = default;
    VideoTensor(int64_t t, int64_t h, int64_t w)
        : frames(t), height(h), width(w),
          data(static_cast<size_t>(t * h * w * 3), 0.0) {}

    double& at(int64_t t, int64_t y, int64_t x, int64_t c) {
        return data[static_cast<size_t>(((t * height + y) * width + x) * 3 + c)];
    }
    double at(int64_t t, int64_t y, int64_t x, int64_t c) const {
        return data[static_cast<size_t>(((t * height + y) * width + x) * 3 + c)];
    }
};

// Single frame, height x width x RGB in [0, 1].
struct ImageTensor {
    int64_t height = 0;
    int64_t width = 0;
    std::vector<double> data;  // [H, W, 3]

    ImageTensor() = default;
    ImageTensor(int64_t h, int64_t w)
        : height(h), width(w), data(static_cast<size_t>(h * w * 3), 0.0) {}

    double& at(int64_t y, int64_t x, int64_t c) {
        return data[static_cast<size_t>((y * width + x) * 3 + c)];
    }
    double at(int64_t y, int64_t x, int64_t c) const {
        return data[static_cast<size_t>((y * width + x) * 3 + c)];
    }
};

inline ImageTensor frame_of(const VideoTensor& v, int64_t t) {
    if (t < 0 || t >= v.frames) {
        throw ContractError("frame index out of range");
    }
    ImageTensor img(v.height, v.width);
    const size_t stride = static_cast<size_t>(v.height * v.width * 3);
    std::copy(v.data.begin() + static_cast<long>(stride * static_cast<size_t>(t)),
              v.data.begin() + static_cast<long>(stride * static_cast<size_t>(t + 1)),
              img.data.begin());
    return img;
}

}  // namespace actflow
