#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/nn/mat.hpp"
#include "actflow/nn/params.hpp"

namespace actflow::nn {

// Eager reverse-mode tape over row-major matrices. Creation order is
// topological order; backward() walks the tape in reverse and accumulates
// parameter gradients into the bound GradBuffer. Gradients are only
// propagated through subgraphs that can reach a trainable parameter, which
// also enforces the freeze contracts (frozen weights never see a gradient).
template <typename Real>
class Graph {
public:
    struct NodeRef {
        int32_t id = -1;
    };

    Graph() = default;

    // Binds a parameter store. Stores bound without a gradient buffer are
    // frozen for this graph: their values are read but never receive
    // gradients, no matter what the entry's trainable flag says.
    void bind(const ParamStore<Real>& store, GradBuffer<Real>* grads = nullptr) {
        for (const Binding& b : bindings_) {
            if (b.store == &store) {
                if (b.grads != grads) {
                    throw ContractError("parameter store already bound with different gradients");
                }
                return;
            }
        }
        bindings_.push_back(Binding{&store, grads});
    }

    const Mat<Real>& value(NodeRef r) const {
        const Node& n = nodes_[static_cast<size_t>(r.id)];
        return n.external ? *n.external : n.owned;
    }

    // ---- leaves ----

    NodeRef constant(Mat<Real> m) {
        Node n;
        n.owned = std::move(m);
        return push(std::move(n), false);
    }

    // Caller guarantees *m outlives the graph.
    NodeRef constant_view(const Mat<Real>* m) {
        Node n;
        n.external = m;
        return push(std::move(n), false);
    }

    NodeRef param(const ParamStore<Real>& store, ParamId pid) {
        size_t bidx = bindings_.size();
        for (size_t i = 0; i < bindings_.size(); ++i) {
            if (bindings_[i].store == &store) {
                bidx = i;
                break;
            }
        }
        if (bidx == bindings_.size()) {
            bindings_.push_back(Binding{&store, nullptr});  // frozen by default
        }
        const uint64_t key = (static_cast<uint64_t>(bidx) << 48) | static_cast<uint64_t>(pid);
        auto it = param_nodes_.find(key);
        if (it != param_nodes_.end()) return NodeRef{it->second};
        const Binding& b = bindings_[bidx];
        Node n;
        n.external = &store.value(pid);
        n.pid = pid;
        n.binding = bidx;
        n.is_param = true;
        const bool trainable = b.grads != nullptr && store.entry(pid).trainable;
        NodeRef r = push(std::move(n), trainable);
        param_nodes_[key] = r.id;
        return r;
    }

    // ---- ops ----

    NodeRef matmul(NodeRef a, NodeRef b) {
        const Mat<Real>& A = value(a);
        const Mat<Real>& B = value(b);
        if (A.cols != B.rows) {
            throw ShapeError("matmul shape mismatch");
        }
        Mat<Real> out(A.rows, B.cols);
        out.map().noalias() = A.map() * B.map();
        return make_op(std::move(out), {a, b}, [this, a, b](Node& n) {
            const Mat<Real>& A = value(a);
            const Mat<Real>& B = value(b);
            if (wants_grad(a)) grad_of(a).map().noalias() += n.grad.map() * B.map().transpose();
            if (wants_grad(b)) grad_of(b).map().noalias() += A.map().transpose() * n.grad.map();
        });
    }

    NodeRef transpose(NodeRef a) {
        const Mat<Real>& A = value(a);
        Mat<Real> out(A.cols, A.rows);
        out.map() = A.map().transpose();
        return make_op(std::move(out), {a}, [this, a](Node& n) {
            if (wants_grad(a)) grad_of(a).map() += n.grad.map().transpose();
        });
    }

    NodeRef add(NodeRef a, NodeRef b) {
        const Mat<Real>& A = value(a);
        const Mat<Real>& B = value(b);
        if (!A.same_shape(B)) {
            throw ShapeError("add shape mismatch");
        }
        Mat<Real> out(A.rows, A.cols);
        out.map() = A.map() + B.map();
        return make_op(std::move(out), {a, b}, [this, a, b](Node& n) {
            if (wants_grad(a)) grad_of(a).map() += n.grad.map();
            if (wants_grad(b)) grad_of(b).map() += n.grad.map();
        });
    }

    // y = A + v broadcast over rows; v is [1, cols].
    NodeRef add_rowvec(NodeRef a, NodeRef v) {
        const Mat<Real>& A = value(a);
        const Mat<Real>& V = value(v);
        if (V.rows != 1 || V.cols != A.cols) {
            throw ShapeError("add_rowvec expects [1, cols] vector");
        }
        Mat<Real> out(A.rows, A.cols);
        out.map() = A.map().rowwise() + V.map().row(0);
        return make_op(std::move(out), {a, v}, [this, a, v](Node& n) {
            if (wants_grad(a)) grad_of(a).map() += n.grad.map();
            if (wants_grad(v)) grad_of(v).map().row(0) += n.grad.map().colwise().sum();
        });
    }

    // y = A * v broadcast over rows.
    NodeRef mul_rowvec(NodeRef a, NodeRef v) {
        const Mat<Real>& A = value(a);
        const Mat<Real>& V = value(v);
        if (V.rows != 1 || V.cols != A.cols) {
            throw ShapeError("mul_rowvec expects [1, cols] vector");
        }
        Mat<Real> out(A.rows, A.cols);
        out.map() = A.map().array().rowwise() * V.map().row(0).array();
        return make_op(std::move(out), {a, v}, [this, a, v](Node& n) {
            const Mat<Real>& A = value(a);
            const Mat<Real>& V = value(v);
            if (wants_grad(a)) {
                grad_of(a).map().array() += n.grad.map().array().rowwise() * V.map().row(0).array();
            }
            if (wants_grad(v)) {
                grad_of(v).map().row(0).array() +=
                    (n.grad.map().array() * A.map().array()).colwise().sum();
            }
        });
    }

    NodeRef scale(NodeRef a, Real s) {
        Mat<Real> out(value(a).rows, value(a).cols);
        out.map() = value(a).map() * s;
        return make_op(std::move(out), {a}, [this, a, s](Node& n) {
            if (wants_grad(a)) grad_of(a).map() += n.grad.map() * s;
        });
    }

    NodeRef add_scalar(NodeRef a, Real s) {
        Mat<Real> out(value(a).rows, value(a).cols);
        out.map() = value(a).map().array() + s;
        return make_op(std::move(out), {a}, [this, a](Node& n) {
            if (wants_grad(a)) grad_of(a).map() += n.grad.map();
        });
    }

    // Adds the scalar to rows [r0, r1) x cols [c0, c1); the scalar itself is
    // a constant (inference-time bias), so no gradient flows to it.
    NodeRef add_block_scalar(NodeRef a, int64_t r0, int64_t r1, int64_t c0, int64_t c1, Real s) {
        const Mat<Real>& A = value(a);
        if (r0 < 0 || r1 > A.rows || c0 < 0 || c1 > A.cols || r0 > r1 || c0 > c1) {
            throw ShapeError("add_block_scalar block out of range");
        }
        Mat<Real> out = A;
        for (int64_t r = r0; r < r1; ++r)
            for (int64_t c = c0; c < c1; ++c) out.at(r, c) += s;
        return make_op(std::move(out), {a}, [this, a](Node& n) {
            if (wants_grad(a)) grad_of(a).map() += n.grad.map();
        });
    }

    NodeRef slice_cols(NodeRef a, int64_t c0, int64_t n_cols) {
        const Mat<Real>& A = value(a);
        if (c0 < 0 || c0 + n_cols > A.cols) {
            throw ShapeError("slice_cols out of range");
        }
        Mat<Real> out(A.rows, n_cols);
        out.map() = A.map().middleCols(c0, n_cols);
        return make_op(std::move(out), {a}, [this, a, c0, n_cols](Node& n) {
            if (wants_grad(a)) grad_of(a).map().middleCols(c0, n_cols) += n.grad.map();
        });
    }

    NodeRef slice_rows(NodeRef a, int64_t r0, int64_t n_rows) {
        const Mat<Real>& A = value(a);
        if (r0 < 0 || r0 + n_rows > A.rows) {
            throw ShapeError("slice_rows out of range");
        }
        Mat<Real> out(n_rows, A.cols);
        out.map() = A.map().middleRows(r0, n_rows);
        return make_op(std::move(out), {a}, [this, a, r0, n_rows](Node& n) {
            if (wants_grad(a)) grad_of(a).map().middleRows(r0, n_rows) += n.grad.map();
        });
    }

    NodeRef concat_cols(const std::vector<NodeRef>& parts) {
        if (parts.empty()) {
            throw ContractError("concat_cols needs at least one part");
        }
        int64_t rows = value(parts[0]).rows, cols = 0;
        for (NodeRef p : parts) {
            if (value(p).rows != rows) throw ShapeError("concat_cols row mismatch");
            cols += value(p).cols;
        }
        Mat<Real> out(rows, cols);
        int64_t off = 0;
        for (NodeRef p : parts) {
            out.map().middleCols(off, value(p).cols) = value(p).map();
            off += value(p).cols;
        }
        return make_op(std::move(out), parts, [this, parts](Node& n) {
            int64_t off = 0;
            for (NodeRef p : parts) {
                const int64_t w = value(p).cols;
                if (wants_grad(p)) grad_of(p).map() += n.grad.map().middleCols(off, w);
                off += w;
            }
        });
    }

    NodeRef concat_rows(const std::vector<NodeRef>& parts) {
        if (parts.empty()) {
            throw ContractError("concat_rows needs at least one part");
        }
        int64_t cols = value(parts[0]).cols, rows = 0;
        for (NodeRef p : parts) {
            if (value(p).cols != cols) throw ShapeError("concat_rows col mismatch");
            rows += value(p).rows;
        }
        Mat<Real> out(rows, cols);
        int64_t off = 0;
        for (NodeRef p : parts) {
            out.map().middleRows(off, value(p).rows) = value(p).map();
            off += value(p).rows;
        }
        return make_op(std::move(out), parts, [this, parts](Node& n) {
            int64_t off = 0;
            for (NodeRef p : parts) {
                const int64_t h = value(p).rows;
                if (wants_grad(p)) grad_of(p).map() += n.grad.map().middleRows(off, h);
                off += h;
            }
        });
    }

    // Row-wise layer normalization without affine parameters.
    NodeRef layernorm_rows(NodeRef a, Real eps = Real(1e-5)) {
        const Mat<Real>& A = value(a);
        Mat<Real> out(A.rows, A.cols);
        Mat<Real> inv_std(A.rows, 1);
        const Real d = static_cast<Real>(A.cols);
        for (int64_t r = 0; r < A.rows; ++r) {
            Real mu = A.map().row(r).sum() / d;
            Real var = Real(0);
            for (int64_t c = 0; c < A.cols; ++c) {
                const Real x = A.at(r, c) - mu;
                var += x * x;
            }
            var /= d;
            const Real is = Real(1) / std::sqrt(var + eps);
            inv_std.at(r, 0) = is;
            for (int64_t c = 0; c < A.cols; ++c) out.at(r, c) = (A.at(r, c) - mu) * is;
        }
        NodeRef ref = make_op(std::move(out), {a}, {});
        Node& node = nodes_[static_cast<size_t>(ref.id)];
        node.back = [this, a, inv_std = std::move(inv_std)](Node& n) {
            if (!wants_grad(a)) return;
            const Mat<Real>& Y = n.owned;
            Mat<Real>& dA = grad_of(a);
            const Real d = static_cast<Real>(Y.cols);
            for (int64_t r = 0; r < Y.rows; ++r) {
                Real mean_dy = Real(0), mean_dyy = Real(0);
                for (int64_t c = 0; c < Y.cols; ++c) {
                    mean_dy += n.grad.at(r, c);
                    mean_dyy += n.grad.at(r, c) * Y.at(r, c);
                }
                mean_dy /= d;
                mean_dyy /= d;
                const Real is = inv_std.at(r, 0);
                for (int64_t c = 0; c < Y.cols; ++c) {
                    dA.at(r, c) += is * (n.grad.at(r, c) - mean_dy - Y.at(r, c) * mean_dyy);
                }
            }
        };
        return ref;
    }

    NodeRef gelu(NodeRef a) {
        const Mat<Real>& A = value(a);
        Mat<Real> out(A.rows, A.cols);
        for (size_t i = 0; i < A.v.size(); ++i) {
            const Real x = A.v[i];
            out.v[i] = x * phi_cdf(x);
        }
        return make_op(std::move(out), {a}, [this, a](Node& n) {
            if (!wants_grad(a)) return;
            const Mat<Real>& A = value(a);
            Mat<Real>& dA = grad_of(a);
            for (size_t i = 0; i < A.v.size(); ++i) {
                const Real x = A.v[i];
                dA.v[i] += n.grad.v[i] * (phi_cdf(x) + x * phi_pdf(x));
            }
        });
    }

    NodeRef silu(NodeRef a) {
        const Mat<Real>& A = value(a);
        Mat<Real> out(A.rows, A.cols);
        for (size_t i = 0; i < A.v.size(); ++i) {
            const Real x = A.v[i];
            out.v[i] = x * sigmoid(x);
        }
        return make_op(std::move(out), {a}, [this, a](Node& n) {
            if (!wants_grad(a)) return;
            const Mat<Real>& A = value(a);
            Mat<Real>& dA = grad_of(a);
            for (size_t i = 0; i < A.v.size(); ++i) {
                const Real x = A.v[i];
                const Real s = sigmoid(x);
                dA.v[i] += n.grad.v[i] * (s * (Real(1) + x * (Real(1) - s)));
            }
        });
    }

    NodeRef softmax_rows(NodeRef a) {
        const Mat<Real>& A = value(a);
        Mat<Real> out(A.rows, A.cols);
        for (int64_t r = 0; r < A.rows; ++r) {
            Real mx = A.at(r, 0);
            for (int64_t c = 1; c < A.cols; ++c) mx = std::max(mx, A.at(r, c));
            Real sum = Real(0);
            for (int64_t c = 0; c < A.cols; ++c) {
                const Real e = std::exp(A.at(r, c) - mx);
                out.at(r, c) = e;
                sum += e;
            }
            for (int64_t c = 0; c < A.cols; ++c) out.at(r, c) /= sum;
        }
        return make_op(std::move(out), {a}, [this, a](Node& n) {
            if (!wants_grad(a)) return;
            const Mat<Real>& P = n.owned;
            Mat<Real>& dA = grad_of(a);
            for (int64_t r = 0; r < P.rows; ++r) {
                Real dot = Real(0);
                for (int64_t c = 0; c < P.cols; ++c) dot += n.grad.at(r, c) * P.at(r, c);
                for (int64_t c = 0; c < P.cols; ++c) {
                    dA.at(r, c) += P.at(r, c) * (n.grad.at(r, c) - dot);
                }
            }
        });
    }

    // Row gather from an embedding table; backward scatter-adds.
    NodeRef gather_rows(NodeRef table, std::vector<int64_t> ids) {
        const Mat<Real>& T = value(table);
        for (int64_t id : ids) {
            if (id < 0 || id >= T.rows) {
                throw ContractError("gather index out of table range");
            }
        }
        Mat<Real> out(static_cast<int64_t>(ids.size()), T.cols);
        for (size_t i = 0; i < ids.size(); ++i) {
            out.map().row(static_cast<int64_t>(i)) = T.map().row(ids[i]);
        }
        return make_op(std::move(out), {table}, [this, table, ids = std::move(ids)](Node& n) {
            if (!wants_grad(table)) return;
            Mat<Real>& dT = grad_of(table);
            for (size_t i = 0; i < ids.size(); ++i) {
                dT.map().row(ids[i]) += n.grad.map().row(static_cast<int64_t>(i));
            }
        });
    }

    // Mean squared error against a constant target; output is 1x1.
    NodeRef mse_vs(NodeRef a, Mat<Real> target) {
        const Mat<Real>& A = value(a);
        if (!A.same_shape(target)) {
            throw ShapeError("mse target shape mismatch");
        }
        Mat<Real> out(1, 1);
        Real acc = Real(0);
        for (size_t i = 0; i < A.v.size(); ++i) {
            const Real d = A.v[i] - target.v[i];
            acc += d * d;
        }
        out.at(0, 0) = acc / static_cast<Real>(A.v.size());
        NodeRef ref = make_op(std::move(out), {a}, {});
        nodes_[static_cast<size_t>(ref.id)].back =
            [this, a, target = std::move(target)](Node& n) {
                if (!wants_grad(a)) return;
                const Mat<Real>& A = value(a);
                Mat<Real>& dA = grad_of(a);
                const Real k = Real(2) / static_cast<Real>(A.v.size()) * n.grad.at(0, 0);
                for (size_t i = 0; i < A.v.size(); ++i) {
                    dA.v[i] += k * (A.v[i] - target.v[i]);
                }
            };
        return ref;
    }

    // ---- backward ----

    void backward(NodeRef loss) {
        Node& ln = nodes_[static_cast<size_t>(loss.id)];
        if (ln.owned.size() != 1 && (!ln.external || ln.external->size() != 1)) {
            throw ContractError("backward expects a scalar loss node");
        }
        grad_of(loss).at(0, 0) = Real(1);
        for (int64_t i = loss.id; i >= 0; --i) {
            Node& n = nodes_[static_cast<size_t>(i)];
            if (!n.grad_touched || !n.needs_grad) continue;
            if (n.is_param) {
                GradBuffer<Real>* gb = bindings_[n.binding].grads;
                if (gb) gb->grad(n.pid).map() += n.grad.map();
            }
            if (n.back) n.back(n);
        }
    }

    size_t node_count() const { return nodes_.size(); }

private:
    struct Binding {
        const ParamStore<Real>* store;
        GradBuffer<Real>* grads;
    };

    struct Node {
        Mat<Real> owned;
        const Mat<Real>* external = nullptr;
        Mat<Real> grad;
        bool grad_touched = false;
        bool needs_grad = false;
        bool is_param = false;
        ParamId pid = 0;
        size_t binding = 0;
        std::function<void(Node&)> back;
    };

    static Real sigmoid(Real x) { return Real(1) / (Real(1) + std::exp(-x)); }
    static Real phi_cdf(Real x) {
        return Real(0.5) * (Real(1) + std::erf(x / std::sqrt(Real(2))));
    }
    static Real phi_pdf(Real x) {
        return std::exp(-x * x / Real(2)) / std::sqrt(Real(2) * static_cast<Real>(M_PI));
    }

    NodeRef push(Node n, bool needs_grad) {
        n.needs_grad = needs_grad;
        nodes_.push_back(std::move(n));
        return NodeRef{static_cast<int32_t>(nodes_.size() - 1)};
    }

    NodeRef make_op(Mat<Real> out, const std::vector<NodeRef>& parents,
                    std::function<void(Node&)> back) {
        bool needs = false;
        for (NodeRef p : parents) {
            needs = needs || nodes_[static_cast<size_t>(p.id)].needs_grad;
        }
        Node n;
        n.owned = std::move(out);
        n.back = std::move(back);
        return push(std::move(n), needs);
    }

    bool wants_grad(NodeRef r) const { return nodes_[static_cast<size_t>(r.id)].needs_grad; }

    Mat<Real>& grad_of(NodeRef r) {
        Node& n = nodes_[static_cast<size_t>(r.id)];
        if (!n.grad_touched) {
            const Mat<Real>& v = n.external ? *n.external : n.owned;
            if (!n.grad.same_shape(v)) n.grad = Mat<Real>::zeros(v.rows, v.cols);
            n.grad_touched = true;
        }
        return n.grad;
    }

    std::vector<Node> nodes_;
    std::unordered_map<uint64_t, int32_t> param_nodes_;
    std::vector<Binding> bindings_;
};

}  // namespace actflow::nn
