#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "actflow/core/errors.hpp"
#include "actflow/core/hash.hpp"
#include "actflow/core/video.hpp"

namespace actflow {

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path.string());
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const void* data, size_t n) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

inline std::string hash_file_hex(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    return fnv1a_hex(bytes.data(), bytes.size());
}

// Raw video layout on disk: frame-major, row-major, RGB, 8-bit per channel.
// Dimensions live in the JSON sidecar next to the file.
inline void write_video_rgb8(const std::filesystem::path& path, const VideoTensor& v) {
    std::vector<unsigned char> bytes(v.data.size());
    for (size_t i = 0; i < v.data.size(); ++i) {
        double x = v.data[i];
        x = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
        bytes[i] = static_cast<unsigned char>(std::lround(x * 255.0));
    }
    write_file_bytes(path, bytes.data(), bytes.size());
}

inline VideoTensor read_video_rgb8(const std::filesystem::path& path,
                                   int64_t frames, int64_t height, int64_t width) {
    auto bytes = read_file_bytes(path);
    const size_t expect = static_cast<size_t>(frames * height * width * 3);
    if (bytes.size() != expect) {
        throw IoError("video file size mismatch: " + path.string() + " has " +
                      std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(expect));
    }
    VideoTensor v(frames, height, width);
    for (size_t i = 0; i < expect; ++i) {
        v.data[i] = static_cast<double>(bytes[i]) / 255.0;
    }
    return v;
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open for reading: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace actflow
