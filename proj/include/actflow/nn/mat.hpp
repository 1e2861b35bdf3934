#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "actflow/core/errors.hpp"
#include "actflow/core/rng.hpp"

namespace actflow::nn {

// Dense row-major matrix; the only tensor shape the compute graph handles.
template <typename Real>
struct Mat {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<Real> v;

    Mat() = default;
    Mat(int64_t r, int64_t c) : rows(r), cols(c), v(static_cast<size_t>(r * c), Real(0)) {}

    Real& at(int64_t r, int64_t c) { return v[static_cast<size_t>(r * cols + c)]; }
    Real at(int64_t r, int64_t c) const { return v[static_cast<size_t>(r * cols + c)]; }
    size_t size() const { return v.size(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    using EigenMap = Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstEigenMap =
        Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    EigenMap map() { return EigenMap(v.data(), rows, cols); }
    ConstEigenMap map() const { return ConstEigenMap(v.data(), rows, cols); }

    static Mat zeros(int64_t r, int64_t c) { return Mat(r, c); }

    static Mat normal(int64_t r, int64_t c, Real stddev, Rng& rng) {
        Mat m(r, c);
        for (Real& x : m.v) x = static_cast<Real>(rng.normal()) * stddev;
        return m;
    }

    static Mat constant(int64_t r, int64_t c, Real value) {
        Mat m(r, c);
        for (Real& x : m.v) x = value;
        return m;
    }
};

}  // namespace actflow::nn
