#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <png.h>

#include "actflow/core/errors.hpp"
#include "actflow/fae/fae.hpp"

namespace actflow::harness {

inline void write_png_rgb8(const std::filesystem::path& path, int64_t width,
                           int64_t height, const std::vector<unsigned char>& rgb) {
    if (rgb.size() != static_cast<size_t>(width * height * 3)) {
        throw ContractError("pixel buffer size mismatch");
    }
    FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) {
        throw IoError("cannot open for writing: " + path.string());
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw IoError("png write failed: " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<size_t>(height));
    for (int64_t y = 0; y < height; ++y) {
        rows[static_cast<size_t>(y)] =
            const_cast<png_bytep>(rgb.data() + static_cast<size_t>(y * width * 3));
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

namespace detail {

// Compact viridis-like ramp for heatmaps.
inline void colormap(double v, unsigned char* rgb) {
    static const double stops[7][3] = {
        {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
        {0.207, 0.372, 0.553}, {0.128, 0.567, 0.551}, {0.369, 0.789, 0.383},
        {0.993, 0.906, 0.144}};
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    const double u = v * 6.0;
    const int i = std::min(5, static_cast<int>(u));
    const double w = u - static_cast<double>(i);
    for (int c = 0; c < 3; ++c) {
        const double x = (1.0 - w) * stops[i][c] + w * stops[i + 1][c];
        rgb[c] = static_cast<unsigned char>(std::lround(x * 255.0));
    }
}

}  // namespace detail

// One heatmap PNG per attention map: temporal slots side by side with a
// 2-pixel separator, nearest-neighbor upscaled, normalized over the map.
inline void write_attention_heatmap(const std::filesystem::path& path,
                                    const fae::AttentionMap& map, int64_t upscale) {
    double lo = map.values.empty() ? 0.0 : map.values[0], hi = lo;
    for (double v : map.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo > 0.0 ? hi - lo : 1.0;
    const int64_t sep = 2;
    const int64_t panel_w = map.grid_w * upscale;
    const int64_t img_w = map.slots * panel_w + (map.slots - 1) * sep;
    const int64_t img_h = map.grid_h * upscale;
    std::vector<unsigned char> rgb(static_cast<size_t>(img_w * img_h * 3), 30);
    for (int64_t s = 0; s < map.slots; ++s) {
        const int64_t x_off = s * (panel_w + sep);
        for (int64_t y = 0; y < img_h; ++y)
            for (int64_t x = 0; x < panel_w; ++x) {
                const double v = (map.at(s, y / upscale, x / upscale) - lo) / range;
                detail::colormap(
                    v, rgb.data() + static_cast<size_t>((y * img_w + x_off + x) * 3));
            }
    }
    write_png_rgb8(path, img_w, img_h, rgb);
}

}  // namespace actflow::harness
