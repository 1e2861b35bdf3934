#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/fae/frequency_embedding.hpp"
#include "actflow/mmdit/attention.hpp"
#include "actflow/mmdit/patchify.hpp"
#include "actflow/nn/graph.hpp"
#include "actflow/nn/params.hpp"
#include "actflow/refadapter/adapter_weights.hpp"

namespace actflow::mmdit {

struct ModelConfig {
    int64_t dim = 64;
    int64_t layers = 2;
    int64_t heads = 4;
    int64_t patch = 2;       // spatial patch size over the latent grid
    int64_t prompt_vocab = 18;
    int64_t prompt_len = 4;
    int64_t mlp_hidden = 128;
};

// Video-latent geometry the model was built for (C is the single-sided
// channel count; the conditioned input carries 2C).
struct LatentShape {
    int64_t t = 0;
    int64_t h = 0;
    int64_t w = 0;
    int64_t c = 0;
    int f_t = 1;
    int f_s = 1;
};

// Accumulates post-softmax video->freq attention over layers and heads.
struct AttnCapture {
    nn::Mat<double> sum;  // [video_tokens, freq_tokens]
    int64_t terms = 0;

    nn::Mat<double> mean() const {
        if (terms == 0) {
            throw ContractError("no attention terms captured");
        }
        nn::Mat<double> m = sum;
        for (double& x : m.v) x /= static_cast<double>(terms);
        return m;
    }
};

template <typename Real>
struct ForwardOptions {
    const refadapter::AdapterWeights<Real>* adapter = nullptr;
    const fae::FrequencyEmbedding<Real>* freq = nullptr;
    Real bias = Real(0);
    AttnCapture* capture = nullptr;
};

template <typename Real>
nn::Mat<Real> sinusoidal_time_embedding(int64_t t, int64_t dim) {
    nn::Mat<Real> e(1, dim);
    const int64_t half = dim / 2;
    for (int64_t i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) /
                                     static_cast<double>(half));
        e.at(0, i) = static_cast<Real>(std::cos(static_cast<double>(t) * freq));
        e.at(0, half + i) = static_cast<Real>(std::sin(static_cast<double>(t) * freq));
    }
    if (dim % 2 == 1) e.at(0, dim - 1) = Real(1);
    return e;
}

// Miniature MMDiT denoiser: patchified latent tokens jointly attended with
// prompt tokens and optional per-layer frequency-embedding tokens, adaptive
// layernorm timestep conditioning, additive attention-bias support in every
// layer. Predicts the added noise for the video latent.
template <typename Real>
class Model {
public:
    using NodeRef = typename nn::Graph<Real>::NodeRef;

    ModelConfig cfg;
    LatentShape latent;
    nn::ParamStore<Real> params;

    static Model init(const ModelConfig& cfg, const LatentShape& latent, Rng& rng) {
        if (cfg.dim % cfg.heads != 0) {
            throw ConfigError("model dim must be divisible by heads");
        }
        if (latent.h % cfg.patch != 0 || latent.w % cfg.patch != 0) {
            throw ShapeError("latent spatial dims must be divisible by patch size");
        }
        Model m;
        m.cfg = cfg;
        m.latent = latent;
        const int64_t d = cfg.dim;
        const Real s = Real(0.02);
        auto& p = m.params;
        const int64_t in_features = 2 * latent.c * cfg.patch * cfg.patch;
        const int64_t out_features = latent.c * cfg.patch * cfg.patch;

        p.add("patch_embed.w", nn::Mat<Real>::normal(in_features, d, s, rng));
        p.add("patch_embed.b", nn::Mat<Real>::zeros(1, d));
        p.add("pos_video", nn::Mat<Real>::normal(m.video_tokens(), d, s, rng));
        p.add("prompt.table", nn::Mat<Real>::normal(cfg.prompt_vocab, d, s, rng));
        p.add("pos_prompt", nn::Mat<Real>::normal(cfg.prompt_len, d, s, rng));
        p.add("time.w1", nn::Mat<Real>::normal(d, d, s, rng));
        p.add("time.b1", nn::Mat<Real>::zeros(1, d));
        p.add("time.w2", nn::Mat<Real>::normal(d, d, s, rng));
        p.add("time.b2", nn::Mat<Real>::zeros(1, d));
        for (int64_t l = 0; l < cfg.layers; ++l) {
            const std::string pre = "layer" + std::to_string(l) + ".";
            for (const char* proj : {"wq", "wk", "wv", "wo"}) {
                p.add(pre + "attn." + proj, nn::Mat<Real>::normal(d, d, s, rng));
                p.add(pre + "attn.b" + std::string(proj).substr(1),
                      nn::Mat<Real>::zeros(1, d));
            }
            p.add(pre + "adaln.w", nn::Mat<Real>::normal(d, 6 * d, s, rng));
            p.add(pre + "adaln.b", nn::Mat<Real>::zeros(1, 6 * d));
            p.add(pre + "mlp.w1", nn::Mat<Real>::normal(d, cfg.mlp_hidden, s, rng));
            p.add(pre + "mlp.b1", nn::Mat<Real>::zeros(1, cfg.mlp_hidden));
            p.add(pre + "mlp.w2", nn::Mat<Real>::normal(cfg.mlp_hidden, d, s, rng));
            p.add(pre + "mlp.b2", nn::Mat<Real>::zeros(1, d));
        }
        p.add("final.adaln.w", nn::Mat<Real>::normal(d, 2 * d, s, rng));
        p.add("final.adaln.b", nn::Mat<Real>::zeros(1, 2 * d));
        p.add("head.w", nn::Mat<Real>::normal(d, out_features, s, rng));
        p.add("head.b", nn::Mat<Real>::zeros(1, out_features));
        return m;
    }

    int64_t video_tokens() const {
        return latent.t * (latent.h / cfg.patch) * (latent.w / cfg.patch);
    }

    // Builds the forward graph and returns the video-token output node,
    // shape [video_tokens, C * patch^2]. Training paths attach a loss to it;
    // inference paths unpatchify its value.
    NodeRef forward_tokens(nn::Graph<Real>& g, const codec::LatentGrid& cond_input,
                           int64_t t, const std::vector<int64_t>& prompt_ids,
                           const ForwardOptions<Real>& opt) const {
        validate(cond_input, prompt_ids, opt);
        const int64_t d = cfg.dim;
        const int64_t heads = cfg.heads;
        const int64_t dh = d / heads;
        const int64_t np = cfg.prompt_len;
        const int64_t nf = opt.freq ? opt.freq->tokens : 0;
        const int64_t nv = video_tokens();

        SegmentInfo seg;
        seg.prompt_len = np;
        seg.freq_len = nf;
        seg.video_len = nv;

        // video tokens: patchify + linear embed + learned positions
        auto tokens = g.constant(patchify<Real>(cond_input, cfg.patch));
        auto vtok = g.add(g.add_rowvec(g.matmul(tokens, P(g, "patch_embed.w")),
                                       P(g, "patch_embed.b")),
                          P(g, "pos_video"));
        // prompt tokens: table lookup + learned positions
        auto ptok = g.add(g.gather_rows(P(g, "prompt.table"), prompt_ids),
                          P(g, "pos_prompt"));

        // timestep conditioning vector
        auto temb = g.constant(sinusoidal_time_embedding<Real>(t, d));
        auto cvec = g.add_rowvec(
            g.matmul(g.silu(g.add_rowvec(g.matmul(temb, P(g, "time.w1")), P(g, "time.b1"))),
                     P(g, "time.w2")),
            P(g, "time.b2"));
        auto cact = g.silu(cvec);

        auto x = g.concat_rows({ptok, vtok});  // [np + nv, d]
        for (int64_t l = 0; l < cfg.layers; ++l) {
            const std::string pre = "layer" + std::to_string(l) + ".";
            NodeRef xin = x;
            if (nf > 0) {
                auto ftok = g.param(opt.freq->params,
                                    opt.freq->params.id_of(
                                        fae::FrequencyEmbedding<Real>::block_name(l)));
                xin = g.concat_rows({g.slice_rows(x, 0, np), ftok, g.slice_rows(x, np, nv)});
            }

            auto mod = g.add_rowvec(g.matmul(cact, P(g, pre + "adaln.w")),
                                    P(g, pre + "adaln.b"));
            auto sh1 = g.slice_cols(mod, 0, d);
            auto sc1 = g.slice_cols(mod, d, d);
            auto g1 = g.slice_cols(mod, 2 * d, d);
            auto sh2 = g.slice_cols(mod, 3 * d, d);
            auto sc2 = g.slice_cols(mod, 4 * d, d);
            auto g2 = g.slice_cols(mod, 5 * d, d);

            auto a = modulate(g, g.layernorm_rows(xin), sh1, sc1);
            auto q = projection(g, a, pre + "attn.wq", pre + "attn.bq", opt, l, "wq");
            auto k = projection(g, a, pre + "attn.wk", pre + "attn.bk", opt, l, "wk");
            auto v = projection(g, a, pre + "attn.wv", pre + "attn.bv", opt, l, "wv");

            std::vector<NodeRef> head_outs;
            head_outs.reserve(static_cast<size_t>(heads));
            for (int64_t hix = 0; hix < heads; ++hix) {
                auto qh = g.slice_cols(q, hix * dh, dh);
                auto kh = g.slice_cols(k, hix * dh, dh);
                auto vh = g.slice_cols(v, hix * dh, dh);
                auto att = attention_core(g, qh, kh, vh, seg, opt.bias);
                head_outs.push_back(att.output);
                if (opt.capture && nf > 0) {
                    accumulate_capture(*opt.capture, g.value(att.probs), seg);
                }
            }
            auto attn = projection(g, g.concat_cols(head_outs), pre + "attn.wo",
                                   pre + "attn.bo", opt, l, "wo");
            auto x1 = g.add(xin, g.mul_rowvec(attn, g1));

            auto b = modulate(g, g.layernorm_rows(x1), sh2, sc2);
            auto mlp = g.add_rowvec(
                g.matmul(g.gelu(g.add_rowvec(g.matmul(b, P(g, pre + "mlp.w1")),
                                             P(g, pre + "mlp.b1"))),
                         P(g, pre + "mlp.w2")),
                P(g, pre + "mlp.b2"));
            auto x2 = g.add(x1, g.mul_rowvec(mlp, g2));

            // strip this layer's freq tokens so the stream length is stable
            x = nf > 0 ? g.concat_rows({g.slice_rows(x2, 0, np),
                                        g.slice_rows(x2, np + nf, nv)})
                       : x2;
        }

        auto fmod = g.add_rowvec(g.matmul(cact, P(g, "final.adaln.w")),
                                 P(g, "final.adaln.b"));
        auto y = modulate(g, g.layernorm_rows(x), g.slice_cols(fmod, 0, d),
                          g.slice_cols(fmod, d, d));
        auto video = g.slice_rows(y, np, nv);
        return g.add_rowvec(g.matmul(video, P(g, "head.w")), P(g, "head.b"));
    }

    // Value-level forward: predicted noise with the video latent's shape.
    codec::LatentGrid forward(const codec::LatentGrid& cond_input, int64_t t,
                              const std::vector<int64_t>& prompt_ids,
                              const ForwardOptions<Real>& opt = {}) const {
        nn::Graph<Real> g;
        auto out = forward_tokens(g, cond_input, t, prompt_ids, opt);
        return unpatchify<Real>(g.value(out), cfg.patch, latent.t, latent.h, latent.w,
                                latent.c, latent.f_t, latent.f_s);
    }

private:
    NodeRef P(nn::Graph<Real>& g, const std::string& name) const {
        return g.param(params, params.id_of(name));
    }

    static NodeRef modulate(nn::Graph<Real>& g, NodeRef x, NodeRef shift, NodeRef scale) {
        return g.add_rowvec(g.mul_rowvec(x, g.add_scalar(scale, Real(1))), shift);
    }

    NodeRef projection(nn::Graph<Real>& g, NodeRef x, const std::string& w_name,
                       const std::string& b_name, const ForwardOptions<Real>& opt,
                       int64_t layer, const std::string& proj) const {
        auto y = g.add_rowvec(g.matmul(x, P(g, w_name)), P(g, b_name));
        if (opt.adapter) {
            const auto& aw = *opt.adapter;
            auto down = g.param(aw.params, aw.params.id_of(
                                               refadapter::AdapterWeights<Real>::down_name(
                                                   layer, proj)));
            auto up = g.param(aw.params, aw.params.id_of(
                                             refadapter::AdapterWeights<Real>::up_name(
                                                 layer, proj)));
            y = g.add(y, g.scale(g.matmul(g.matmul(x, down), up), aw.scale));
        }
        return y;
    }

    static void accumulate_capture(AttnCapture& cap, const nn::Mat<Real>& probs,
                                   const SegmentInfo& seg) {
        if (cap.sum.rows != seg.video_len || cap.sum.cols != seg.freq_len) {
            cap.sum = nn::Mat<double>::zeros(seg.video_len, seg.freq_len);
            cap.terms = 0;
        }
        for (int64_t r = 0; r < seg.video_len; ++r)
            for (int64_t c = 0; c < seg.freq_len; ++c)
                cap.sum.at(r, c) += static_cast<double>(
                    probs.at(seg.video_begin() + r, seg.freq_begin() + c));
        cap.terms += 1;
    }

    void validate(const codec::LatentGrid& cond_input,
                  const std::vector<int64_t>& prompt_ids,
                  const ForwardOptions<Real>& opt) const {
        if (cond_input.c != 2 * latent.c) {
            throw ShapeError("conditioned input must carry 2C channels (got " +
                             std::to_string(cond_input.c) + ", expected " +
                             std::to_string(2 * latent.c) + ")");
        }
        if (cond_input.t != latent.t || cond_input.h != latent.h ||
            cond_input.w != latent.w) {
            throw ShapeError("conditioned input geometry does not match the model");
        }
        if (static_cast<int64_t>(prompt_ids.size()) != cfg.prompt_len) {
            throw ContractError("prompt id count must equal prompt_len");
        }
        if (!(opt.bias >= Real(0)) || !std::isfinite(static_cast<double>(opt.bias))) {
            throw ContractError("attention bias must be finite and >= 0");
        }
        if (opt.bias > Real(0) && !opt.freq) {
            throw ContractError(
                "attention bias has no target: no frequency embedding attached");
        }
        if (opt.freq) {
            if (opt.freq->layers != cfg.layers || opt.freq->dim != cfg.dim) {
                throw ConfigError("frequency embedding geometry does not match the model");
            }
        }
        if (opt.adapter) {
            if (opt.adapter->layers != cfg.layers || opt.adapter->dim != cfg.dim) {
                throw ConfigError("adapter geometry does not match the model");
            }
        }
    }
};

}  // namespace actflow::mmdit
