#pragma once

#include <cstdint>
#include <vector>

#include "actflow/codec/codec.hpp"
#include "actflow/mmdit/model.hpp"
#include "actflow/mmdit/patchify.hpp"
#include "actflow/nn/graph.hpp"

namespace actflow::mmdit {

// Denoising MSE as a graph node: the model's predicted noise (token-shaped)
// against the patchified added noise. Patchification is a bijection, so the
// mean over token entries equals the mean over latent entries.
template <typename Real>
typename nn::Graph<Real>::NodeRef denoise_loss_node(
    nn::Graph<Real>& g, const Model<Real>& model, const codec::LatentGrid& model_input,
    int64_t t, const std::vector<int64_t>& prompt_ids, const codec::LatentGrid& noise,
    const ForwardOptions<Real>& opt = {}) {
    auto pred = model.forward_tokens(g, model_input, t, prompt_ids, opt);
    return g.mse_vs(pred, patchify<Real>(noise, model.cfg.patch));
}

}  // namespace actflow::mmdit
