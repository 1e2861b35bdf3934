#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/nn/params.hpp"

namespace actflow::nn {

// AdamW over the trainable subset of a ParamStore.
template <typename Real>
class AdamW {
public:
    struct Options {
        Real lr = Real(1e-4);
        Real beta1 = Real(0.9);
        Real beta2 = Real(0.999);
        Real eps = Real(1e-8);
        Real weight_decay = Real(0);
        Real grad_clip = Real(1);  // global L2 norm; <= 0 disables
        int64_t warmup_steps = 0;  // linear warmup from 0 to lr
    };

    AdamW(ParamStore<Real>& store, Options opt) : store_(&store), opt_(opt) {
        m_.resize(store.size());
        v_.resize(store.size());
        for (size_t i = 0; i < store.size(); ++i) {
            const Mat<Real>& p = store.value(i);
            m_[i] = Mat<Real>::zeros(p.rows, p.cols);
            v_[i] = Mat<Real>::zeros(p.rows, p.cols);
        }
    }

    int64_t step_count() const { return t_; }

    void step(GradBuffer<Real>& grads) {
        ++t_;
        Real lr = opt_.lr;
        if (opt_.warmup_steps > 0 && t_ <= opt_.warmup_steps) {
            lr = opt_.lr * static_cast<Real>(t_) / static_cast<Real>(opt_.warmup_steps);
        }

        Real clip_scale = Real(1);
        if (opt_.grad_clip > Real(0)) {
            double norm2 = 0.0;
            for (size_t i = 0; i < store_->size(); ++i) {
                if (!store_->entry(i).trainable || !grads.touched(i)) continue;
                const Mat<Real>& g = grads.grad(i);
                for (const Real x : g.v) norm2 += static_cast<double>(x) * static_cast<double>(x);
            }
            const double norm = std::sqrt(norm2);
            if (norm > static_cast<double>(opt_.grad_clip)) {
                clip_scale = static_cast<Real>(static_cast<double>(opt_.grad_clip) / norm);
            }
        }

        const Real bc1 = Real(1) - std::pow(opt_.beta1, static_cast<Real>(t_));
        const Real bc2 = Real(1) - std::pow(opt_.beta2, static_cast<Real>(t_));
        for (size_t i = 0; i < store_->size(); ++i) {
            if (!store_->entry(i).trainable || !grads.touched(i)) continue;
            Mat<Real>& p = store_->value(i);
            const Mat<Real>& g = grads.grad(i);
            Mat<Real>& m = m_[i];
            Mat<Real>& v = v_[i];
            for (size_t k = 0; k < p.v.size(); ++k) {
                const Real gk = g.v[k] * clip_scale;
                m.v[k] = opt_.beta1 * m.v[k] + (Real(1) - opt_.beta1) * gk;
                v.v[k] = opt_.beta2 * v.v[k] + (Real(1) - opt_.beta2) * gk * gk;
                const Real mhat = m.v[k] / bc1;
                const Real vhat = v.v[k] / bc2;
                p.v[k] -= lr * (mhat / (std::sqrt(vhat) + opt_.eps) +
                                opt_.weight_decay * p.v[k]);
            }
        }
    }

private:
    ParamStore<Real>* store_;
    Options opt_;
    std::vector<Mat<Real>> m_;
    std::vector<Mat<Real>> v_;
    int64_t t_ = 0;
};

}  // namespace actflow::nn
