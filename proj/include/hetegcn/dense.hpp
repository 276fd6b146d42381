#pragma once

#include <span>
#include <vector>

#include "hetegcn/types.hpp"

namespace hetegcn {

/// Row-major dense matrix of 64-bit reals.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(index_t n_rows, index_t n_cols)
        : n_rows_(n_rows), n_cols_(n_cols),
          values_(static_cast<std::size_t>(n_rows * n_cols), 0.0) {}
    DenseMatrix(index_t n_rows, index_t n_cols, std::vector<real_t> values);

    index_t n_rows() const { return n_rows_; }
    index_t n_cols() const { return n_cols_; }
    index_t size() const { return n_rows_ * n_cols_; }

    real_t* row(index_t i) { return values_.data() + i * n_cols_; }
    const real_t* row(index_t i) const { return values_.data() + i * n_cols_; }
    std::span<const real_t> row_span(index_t i) const {
        return {row(i), static_cast<std::size_t>(n_cols_)};
    }

    real_t& operator()(index_t i, index_t j) { return values_[i * n_cols_ + j]; }
    real_t operator()(index_t i, index_t j) const {
        return values_[i * n_cols_ + j];
    }

    real_t* data() { return values_.data(); }
    const real_t* data() const { return values_.data(); }
    const std::vector<real_t>& values() const { return values_; }

    void set_zero();
    bool same_shape(const DenseMatrix& other) const {
        return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_;
    }

    /// True when every entry is finite.
    bool all_finite() const;

private:
    index_t n_rows_ = 0;
    index_t n_cols_ = 0;
    std::vector<real_t> values_;
};

DenseMatrix transpose(const DenseMatrix& a);

/// C += A * B. Shapes (r x p) * (p x q) -> (r x q).
void gemm_nn_accum(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);

/// C = A * B.
DenseMatrix gemm_nn(const DenseMatrix& a, const DenseMatrix& b);

/// C = A^T * B. Shapes (n x p)^T * (n x q) -> (p x q).
DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b);

/// max |a - b| over entries; shapes must match.
real_t max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

} // namespace hetegcn
