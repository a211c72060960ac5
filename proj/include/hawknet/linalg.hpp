// Small dense matrix/vector helpers used by the optimizers and networks.
// Everything here is row-major std::vector<double>; shapes in this codebase
// are tiny (tens of rows), so no BLAS backing is warranted.

#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hawknet {

using Vec = std::vector<double>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    void set_zero() { data.assign(data.size(), 0.0); }
};

// out = M * v
inline void matvec(const Matrix& m, std::span<const double> v, std::span<double> out) {
    assert(v.size() == m.cols && out.size() == m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * m.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * v[c];
        out[r] = acc;
    }
}

// out += M * v
inline void matvec_add(const Matrix& m, std::span<const double> v, std::span<double> out) {
    assert(v.size() == m.cols && out.size() == m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * m.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * v[c];
        out[r] += acc;
    }
}

// out += M^T * v
inline void matvec_transpose_add(const Matrix& m, std::span<const double> v, std::span<double> out) {
    assert(v.size() == m.rows && out.size() == m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double vr = v[r];
        if (vr == 0.0) continue;
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) out[c] += row[c] * vr;
    }
}

// M += a * b^T
inline void outer_add(Matrix& m, std::span<const double> a, std::span<const double> b) {
    assert(a.size() == m.rows && b.size() == m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double* row = m.data.data() + r * m.cols;
        const double ar = a[r];
        for (std::size_t c = 0; c < m.cols; ++c) row[c] += ar * b[c];
    }
}

inline void vec_add(std::span<double> out, std::span<const double> v) {
    assert(out.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace hawknet
