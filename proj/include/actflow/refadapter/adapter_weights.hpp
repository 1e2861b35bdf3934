#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/nn/params.hpp"

namespace actflow::refadapter {

// Low-rank factor pairs for the query/key/value/output projections of every
// layer. Up factors start at zero, so a fresh adapter is an exact identity.
template <typename Real>
struct AdapterWeights {
    int64_t rank = 8;
    Real scale = Real(1);
    int64_t layers = 0;
    int64_t dim = 0;
    nn::ParamStore<Real> params;

    static const std::vector<std::string>& projection_names() {
        static const std::vector<std::string> kNames = {"wq", "wk", "wv", "wo"};
        return kNames;
    }

    static std::string down_name(int64_t layer, const std::string& proj) {
        return "layer" + std::to_string(layer) + "." + proj + ".down";
    }
    static std::string up_name(int64_t layer, const std::string& proj) {
        return "layer" + std::to_string(layer) + "." + proj + ".up";
    }

    static AdapterWeights init(int64_t layers, int64_t dim, int64_t rank, Real scale,
                               Rng& rng) {
        if (rank < 1 || layers < 1 || dim < 1) {
            throw ConfigError("adapter geometry must be positive");
        }
        AdapterWeights a;
        a.rank = rank;
        a.scale = scale;
        a.layers = layers;
        a.dim = dim;
        for (int64_t l = 0; l < layers; ++l) {
            for (const std::string& proj : projection_names()) {
                a.params.add(down_name(l, proj),
                             nn::Mat<Real>::normal(dim, rank, Real(0.02), rng));
                a.params.add(up_name(l, proj), nn::Mat<Real>::zeros(rank, dim));
            }
        }
        return a;
    }

    size_t parameter_count() const { return params.scalar_count(); }
};

}  // namespace actflow::refadapter
