#pragma once

#include <cstdint>
#include <string>

#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/nn/params.hpp"

namespace actflow::fae {

// Per-layer learnable token blocks concatenated to the transformer layer
// inputs; one embedding is trained per reference video.
template <typename Real>
struct FrequencyEmbedding {
    int64_t layers = 0;
    int64_t tokens = 0;
    int64_t dim = 0;
    std::string reference_id;
    nn::ParamStore<Real> params;

    static std::string block_name(int64_t layer) {
        return "layer" + std::to_string(layer) + ".tokens";
    }

    static FrequencyEmbedding init(int64_t layers, int64_t tokens, int64_t dim,
                                   std::string reference_id, Real init_std, Rng& rng) {
        if (layers < 1 || tokens < 1 || dim < 1) {
            throw ConfigError("frequency embedding geometry must be positive");
        }
        FrequencyEmbedding e;
        e.layers = layers;
        e.tokens = tokens;
        e.dim = dim;
        e.reference_id = std::move(reference_id);
        for (int64_t l = 0; l < layers; ++l) {
            e.params.add(block_name(l), nn::Mat<Real>::normal(tokens, dim, init_std, rng));
        }
        return e;
    }
};

}  // namespace actflow::fae
