#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/nn/mat.hpp"

namespace actflow::nn {

using ParamId = size_t;

// Named parameter registry. Gradient storage lives in GradBuffer so several
// threads can evaluate independent samples and reduce deterministically.
template <typename Real>
class ParamStore {
public:
    struct Entry {
        std::string name;
        Mat<Real> value;
        bool trainable = true;
    };

    ParamId add(std::string name, Mat<Real> value, bool trainable = true) {
        if (index_.count(name)) {
            throw ConfigError("duplicate parameter name: " + name);
        }
        index_[name] = entries_.size();
        entries_.push_back(Entry{std::move(name), std::move(value), trainable});
        return entries_.size() - 1;
    }

    size_t size() const { return entries_.size(); }
    Entry& entry(ParamId id) { return entries_[id]; }
    const Entry& entry(ParamId id) const { return entries_[id]; }
    Mat<Real>& value(ParamId id) { return entries_[id].value; }
    const Mat<Real>& value(ParamId id) const { return entries_[id].value; }

    bool has(const std::string& name) const { return index_.count(name) > 0; }

    ParamId id_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) {
            throw ConfigError("unknown parameter name: " + name);
        }
        return it->second;
    }

    size_t scalar_count() const {
        size_t n = 0;
        for (const Entry& e : entries_) n += e.value.size();
        return n;
    }

    void set_all_trainable(bool flag) {
        for (Entry& e : entries_) e.trainable = flag;
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, size_t> index_;
};

// Gradient accumulator matching a ParamStore's layout. Lazily shaped.
template <typename Real>
class GradBuffer {
public:
    explicit GradBuffer(const ParamStore<Real>& store) : store_(&store) {
        grads_.resize(store.size());
        used_.assign(store.size(), 0);
    }

    void reset() {
        for (size_t i = 0; i < grads_.size(); ++i) {
            if (used_[i]) std::fill(grads_[i].v.begin(), grads_[i].v.end(), Real(0));
            used_[i] = 0;
        }
    }

    Mat<Real>& grad(ParamId id) {
        Mat<Real>& g = grads_[id];
        if (!used_[id]) {
            const Mat<Real>& v = store_->value(id);
            if (!g.same_shape(v)) g = Mat<Real>::zeros(v.rows, v.cols);
            used_[id] = 1;
        }
        return g;
    }

    bool touched(ParamId id) const { return used_[id] != 0; }

    // Deterministic reduction: callers add buffers in a fixed order.
    void add_from(const GradBuffer& other) {
        for (size_t i = 0; i < grads_.size(); ++i) {
            if (!other.used_[i]) continue;
            Mat<Real>& g = grad(i);
            const Mat<Real>& o = other.grads_[i];
            for (size_t k = 0; k < g.v.size(); ++k) g.v[k] += o.v[k];
        }
    }

    void scale(Real s) {
        for (size_t i = 0; i < grads_.size(); ++i) {
            if (!used_[i]) continue;
            for (Real& x : grads_[i].v) x *= s;
        }
    }

private:
    const ParamStore<Real>* store_;
    std::vector<Mat<Real>> grads_;
    std::vector<uint8_t> used_;
};

}  // namespace actflow::nn
