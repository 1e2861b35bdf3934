#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "actflow/core/errors.hpp"
#include "actflow/core/hash.hpp"
#include "actflow/core/io.hpp"
#include "actflow/nn/params.hpp"

namespace actflow::harness {

enum class CheckpointKind : uint8_t { base = 0, adapter = 1, freq_emb = 2 };

inline std::string to_string(CheckpointKind k) {
    switch (k) {
        case CheckpointKind::base: return "base";
        case CheckpointKind::adapter: return "adapter";
        case CheckpointKind::freq_emb: return "freq_emb";
    }
    throw ConfigError("invalid checkpoint kind value");
}

// Versioned binary container: magic, version, kind, JSON config record,
// named f64 arrays, trailing FNV-1a 64 content hash over everything before
// it. load(save(x)) is bit-exact.
struct Checkpoint {
    uint32_t version = 1;
    CheckpointKind kind = CheckpointKind::base;
    nlohmann::json config;
    std::vector<std::pair<std::string, nn::Mat<double>>> arrays;
    std::string content_hash;  // filled by write/read
};

namespace detail {

inline void put_bytes(std::vector<unsigned char>& out, const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    out.insert(out.end(), b, b + n);
}

template <typename T>
void put_pod(std::vector<unsigned char>& out, T v) {
    put_bytes(out, &v, sizeof(T));
}

template <typename T>
T get_pod(const std::vector<unsigned char>& in, size_t& off) {
    if (off + sizeof(T) > in.size()) {
        throw IoError("checkpoint truncated");
    }
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[4] = {'A', 'F', 'C', 'K'};

inline void write_checkpoint(const std::filesystem::path& path, Checkpoint& ckpt) {
    std::vector<unsigned char> bytes;
    detail::put_bytes(bytes, kCheckpointMagic, 4);
    detail::put_pod<uint32_t>(bytes, ckpt.version);
    detail::put_pod<uint8_t>(bytes, static_cast<uint8_t>(ckpt.kind));
    const std::string cfg = ckpt.config.dump();
    detail::put_pod<uint32_t>(bytes, static_cast<uint32_t>(cfg.size()));
    detail::put_bytes(bytes, cfg.data(), cfg.size());
    detail::put_pod<uint32_t>(bytes, static_cast<uint32_t>(ckpt.arrays.size()));
    for (const auto& [name, m] : ckpt.arrays) {
        detail::put_pod<uint16_t>(bytes, static_cast<uint16_t>(name.size()));
        detail::put_bytes(bytes, name.data(), name.size());
        detail::put_pod<uint64_t>(bytes, static_cast<uint64_t>(m.rows));
        detail::put_pod<uint64_t>(bytes, static_cast<uint64_t>(m.cols));
        detail::put_bytes(bytes, m.v.data(), m.v.size() * sizeof(double));
    }
    Fnv1a h;
    h.update(bytes.data(), bytes.size());
    ckpt.content_hash = h.hex();
    detail::put_pod<uint64_t>(bytes, h.digest());
    write_file_bytes(path, bytes.data(), bytes.size());
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    if (bytes.size() < 4 + sizeof(uint32_t) + 1 + sizeof(uint64_t)) {
        throw IoError("checkpoint too small: " + path.string());
    }
    if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
        throw IoError("bad checkpoint magic: " + path.string());
    }

    // verify trailing hash over the preceding bytes
    const size_t payload = bytes.size() - sizeof(uint64_t);
    uint64_t stored;
    std::memcpy(&stored, bytes.data() + payload, sizeof(uint64_t));
    Fnv1a h;
    h.update(bytes.data(), payload);
    if (h.digest() != stored) {
        throw IoError("checkpoint content hash mismatch: " + path.string());
    }

    size_t off = 4;
    Checkpoint ckpt;
    ckpt.version = detail::get_pod<uint32_t>(bytes, off);
    if (ckpt.version != 1) {
        throw IoError("unsupported checkpoint version " + std::to_string(ckpt.version));
    }
    ckpt.kind = static_cast<CheckpointKind>(detail::get_pod<uint8_t>(bytes, off));
    const auto cfg_len = detail::get_pod<uint32_t>(bytes, off);
    if (off + cfg_len > payload) {
        throw IoError("checkpoint truncated");
    }
    try {
        ckpt.config = nlohmann::json::parse(bytes.begin() + static_cast<long>(off),
                                            bytes.begin() + static_cast<long>(off + cfg_len));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed checkpoint config: ") + e.what());
    }
    off += cfg_len;
    const auto n_arrays = detail::get_pod<uint32_t>(bytes, off);
    for (uint32_t i = 0; i < n_arrays; ++i) {
        const auto name_len = detail::get_pod<uint16_t>(bytes, off);
        if (off + name_len > payload) {
            throw IoError("checkpoint truncated");
        }
        std::string name(reinterpret_cast<const char*>(bytes.data() + off), name_len);
        off += name_len;
        const auto rows = static_cast<int64_t>(detail::get_pod<uint64_t>(bytes, off));
        const auto cols = static_cast<int64_t>(detail::get_pod<uint64_t>(bytes, off));
        nn::Mat<double> m(rows, cols);
        const size_t n = m.v.size() * sizeof(double);
        if (off + n > payload) {
            throw IoError("checkpoint truncated");
        }
        std::memcpy(m.v.data(), bytes.data() + off, n);
        off += n;
        ckpt.arrays.emplace_back(std::move(name), std::move(m));
    }
    ckpt.content_hash = h.hex();
    return ckpt;
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path,
                                  CheckpointKind expected) {
    Checkpoint ckpt = read_checkpoint(path);
    if (ckpt.kind != expected) {
        throw ConfigError("checkpoint kind mismatch: " + path.string() + " holds '" +
                          to_string(ckpt.kind) + "', expected '" + to_string(expected) +
                          "'");
    }
    return ckpt;
}

template <typename Real>
Checkpoint make_checkpoint(CheckpointKind kind, nlohmann::json config,
                           const nn::ParamStore<Real>& store) {
    Checkpoint ckpt;
    ckpt.kind = kind;
    ckpt.config = std::move(config);
    for (size_t i = 0; i < store.size(); ++i) {
        const auto& e = store.entry(i);
        nn::Mat<double> m(e.value.rows, e.value.cols);
        for (size_t k = 0; k < m.v.size(); ++k) {
            m.v[k] = static_cast<double>(e.value.v[k]);
        }
        ckpt.arrays.emplace_back(e.name, std::move(m));
    }
    return ckpt;
}

// Copies arrays into an existing store; names must match the store exactly.
template <typename Real>
void load_into_store(const Checkpoint& ckpt, nn::ParamStore<Real>& store) {
    if (ckpt.arrays.size() != store.size()) {
        throw ConfigError("checkpoint holds " + std::to_string(ckpt.arrays.size()) +
                          " arrays, store expects " + std::to_string(store.size()));
    }
    for (const auto& [name, m] : ckpt.arrays) {
        const nn::ParamId id = store.id_of(name);  // throws on unknown names
        nn::Mat<Real>& dst = store.value(id);
        if (dst.rows != m.rows || dst.cols != m.cols) {
            throw ConfigError("checkpoint array shape mismatch for " + name);
        }
        for (size_t k = 0; k < m.v.size(); ++k) {
            dst.v[k] = static_cast<Real>(m.v[k]);
        }
    }
}

}  // namespace actflow::harness
