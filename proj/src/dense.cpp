#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "hetegcn/dense.hpp"
#include "hetegcn/error.hpp"
#include "hetegcn/kernels.hpp"

namespace hetegcn {

namespace {

std::string shape_str(index_t r, index_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

} // namespace

DenseMatrix::DenseMatrix(index_t n_rows, index_t n_cols,
                         std::vector<real_t> values)
    : n_rows_(n_rows), n_cols_(n_cols), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(n_rows_ * n_cols_)) {
        throw ShapeError("dense value count " + std::to_string(values_.size()) +
                         " does not match shape " + shape_str(n_rows_, n_cols_));
    }
}

void DenseMatrix::set_zero() {
    std::fill(values_.begin(), values_.end(), 0.0);
}

bool DenseMatrix::all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](real_t v) { return std::isfinite(v); });
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.n_cols(), a.n_rows());
    for (index_t i = 0; i < a.n_rows(); ++i) {
        for (index_t j = 0; j < a.n_cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

void gemm_nn_accum(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    if (a.n_cols() != b.n_rows() || c.n_rows() != a.n_rows() ||
        c.n_cols() != b.n_cols()) {
        throw ShapeError("gemm_nn shape mismatch: " +
                         shape_str(a.n_rows(), a.n_cols()) + " * " +
                         shape_str(b.n_rows(), b.n_cols()) + " -> " +
                         shape_str(c.n_rows(), c.n_cols()));
    }
    const std::size_t q = static_cast<std::size_t>(b.n_cols());
    for (index_t i = 0; i < a.n_rows(); ++i) {
        real_t* c_row = c.row(i);
        for (index_t k = 0; k < a.n_cols(); ++k) {
            kernels::axpy(c_row, a(i, k), b.row(k), q);
        }
    }
}

DenseMatrix gemm_nn(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.n_rows(), b.n_cols());
    gemm_nn_accum(a, b, c);
    return c;
}

DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.n_rows() != b.n_rows()) {
        throw ShapeError("gemm_tn shape mismatch: " +
                         shape_str(a.n_rows(), a.n_cols()) + "^T * " +
                         shape_str(b.n_rows(), b.n_cols()));
    }
    DenseMatrix c(a.n_cols(), b.n_cols());
    const std::size_t q = static_cast<std::size_t>(b.n_cols());
    for (index_t i = 0; i < a.n_rows(); ++i) {
        const real_t* b_row = b.row(i);
        for (index_t k = 0; k < a.n_cols(); ++k) {
            kernels::axpy(c.row(k), a(i, k), b_row, q);
        }
    }
    return c;
}

real_t max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("max_abs_diff shape mismatch: " +
                         shape_str(a.n_rows(), a.n_cols()) + " vs " +
                         shape_str(b.n_rows(), b.n_cols()));
    }
    real_t best = 0.0;
    const real_t* pa = a.data();
    const real_t* pb = b.data();
    for (index_t i = 0; i < a.size(); ++i) {
        best = std::max(best, std::abs(pa[i] - pb[i]));
    }
    return best;
}

} // namespace hetegcn
