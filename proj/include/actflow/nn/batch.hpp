#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "actflow/core/errors.hpp"
#include "actflow/nn/graph.hpp"
#include "actflow/nn/params.hpp"

namespace actflow::nn {

// Evaluates `batch` independent per-sample losses, accumulating gradients of
// the MEAN loss into `grads`. Samples run in parallel but gradients reduce
// in sample order, so results are bit-identical regardless of thread count.
// `make_loss(graph, sample_index)` builds one sample's loss node.
template <typename Real, typename MakeLossFn>
double batched_loss_and_grads(const ParamStore<Real>& store, GradBuffer<Real>& grads,
                              int64_t batch, MakeLossFn&& make_loss) {
    if (batch < 1) {
        throw ContractError("batch size must be >= 1");
    }
    grads.reset();
    std::vector<std::unique_ptr<GradBuffer<Real>>> sample_grads(
        static_cast<size_t>(batch));
    std::vector<double> losses(static_cast<size_t>(batch), 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int64_t i = 0; i < batch; ++i) {
        sample_grads[static_cast<size_t>(i)] = std::make_unique<GradBuffer<Real>>(store);
        Graph<Real> g;
        g.bind(store, sample_grads[static_cast<size_t>(i)].get());
        auto loss = make_loss(g, i);
        losses[static_cast<size_t>(i)] = static_cast<double>(g.value(loss).at(0, 0));
        g.backward(loss);
    }

    double total = 0.0;
    for (int64_t i = 0; i < batch; ++i) {
        grads.add_from(*sample_grads[static_cast<size_t>(i)]);
        total += losses[static_cast<size_t>(i)];
    }
    grads.scale(Real(1) / static_cast<Real>(batch));
    return total / static_cast<double>(batch);
}

}  // namespace actflow::nn
