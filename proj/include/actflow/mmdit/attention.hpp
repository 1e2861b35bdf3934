#pragma once

#include <cmath>
#include <cstdint>

#include "actflow/core/errors.hpp"
#include "actflow/nn/graph.hpp"
#include "actflow/nn/mat.hpp"

namespace actflow::mmdit {

// Token segment layout within one attention sequence: prompt tokens first,
// then (optional) frequency-embedding tokens, then video tokens.
struct SegmentInfo {
    int64_t prompt_len = 0;
    int64_t freq_len = 0;
    int64_t video_len = 0;

    int64_t prompt_begin() const { return 0; }
    int64_t freq_begin() const { return prompt_len; }
    int64_t video_begin() const { return prompt_len + freq_len; }
    int64_t total() const { return prompt_len + freq_len + video_len; }
};

template <typename Real>
struct AttentionNodes {
    typename nn::Graph<Real>::NodeRef output;
    typename nn::Graph<Real>::NodeRef probs;  // post-softmax, full rows
};

// Scaled dot-product attention with an additive scalar bias on the
// pre-softmax scores of every (video query, frequency key) pair. This is the
// one attention path in the library; the model calls it per head.
template <typename Real>
AttentionNodes<Real> attention_core(nn::Graph<Real>& g,
                                    typename nn::Graph<Real>::NodeRef q,
                                    typename nn::Graph<Real>::NodeRef k,
                                    typename nn::Graph<Real>::NodeRef v,
                                    const SegmentInfo& seg, Real bias) {
    if (!(bias >= Real(0)) || !std::isfinite(static_cast<double>(bias))) {
        throw ContractError("attention bias must be a finite value >= 0");
    }
    if (bias > Real(0) && seg.freq_len == 0) {
        throw ContractError("attention bias has no target: no frequency segment present");
    }
    const int64_t total = seg.total();
    if (g.value(q).rows != total || g.value(k).rows != total || g.value(v).rows != total) {
        throw ShapeError("segment info does not cover the token sequence");
    }
    const Real inv_sqrt_d = Real(1) / std::sqrt(static_cast<Real>(g.value(q).cols));
    auto scores = g.scale(g.matmul(q, g.transpose(k)), inv_sqrt_d);
    if (bias != Real(0)) {
        scores = g.add_block_scalar(scores, seg.video_begin(), seg.video_begin() + seg.video_len,
                                    seg.freq_begin(), seg.freq_begin() + seg.freq_len, bias);
    }
    auto probs = g.softmax_rows(scores);
    return AttentionNodes<Real>{g.matmul(probs, v), probs};
}

template <typename Real>
struct AttentionResult {
    nn::Mat<Real> output;
    nn::Mat<Real> probs;  // full post-softmax attention map
};

// Value-level wrapper around attention_core for direct use and testing.
template <typename Real>
AttentionResult<Real> attention_with_bias(const nn::Mat<Real>& queries,
                                          const nn::Mat<Real>& keys,
                                          const nn::Mat<Real>& values,
                                          const SegmentInfo& seg, Real bias) {
    nn::Graph<Real> g;
    auto q = g.constant(queries);
    auto k = g.constant(keys);
    auto v = g.constant(values);
    auto nodes = attention_core(g, q, k, v, seg, bias);
    return AttentionResult<Real>{g.value(nodes.output), g.value(nodes.probs)};
}

}  // namespace actflow::mmdit
