#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace actflow {

// Incremental FNV-1a 64-bit hash. Used for corpus/checkpoint content hashes
// and provenance records (integrity fingerprints, not cryptography).
class Fnv1a {
public:
    void update(const void* bytes, size_t n) {
        const auto* p = static_cast<const unsigned char*>(bytes);
        for (size_t i = 0; i < n; ++i) {
            h_ ^= static_cast<uint64_t>(p[i]);
            h_ *= 0x100000001b3ULL;
        }
    }

    void update(const std::string& s) { update(s.data(), s.size()); }

    uint64_t digest() const { return h_; }

    std::string hex() const {
        static const char* k = "0123456789abcdef";
        std::string out(16, '0');
        uint64_t v = h_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<size_t>(i)] = k[v & 0xf];
            v >>= 4;
        }
        return out;
    }

private:
    uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string fnv1a_hex(const void* bytes, size_t n) {
    Fnv1a h;
    h.update(bytes, n);
    return h.hex();
}

}  // namespace actflow
