#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hetegcn/dense.hpp"
#include "hetegcn/types.hpp"

namespace hetegcn {

struct Triplet {
    index_t row;
    index_t col;
    real_t value;
};

/// CSR sparse matrix in canonical form:
///   - row_offsets non-decreasing, row_offsets[0] == 0, back() == nnz
///   - column indices strictly increasing within each row
///   - no stored explicit zeros
/// All construction paths (csr_from_coo, transpose, normalize, spgemm, I/O)
/// maintain the invariants; validate() re-checks them.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(index_t n_rows, index_t n_cols,
                 std::vector<index_t> row_offsets,
                 std::vector<index_t> col_indices, std::vector<real_t> values);

    index_t n_rows() const { return n_rows_; }
    index_t n_cols() const { return n_cols_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }

    const std::vector<index_t>& row_offsets() const { return row_offsets_; }
    const std::vector<index_t>& col_indices() const { return col_indices_; }
    const std::vector<real_t>& values() const { return values_; }
    std::vector<real_t>& mutable_values() { return values_; }

    index_t row_nnz(index_t i) const {
        return row_offsets_[i + 1] - row_offsets_[i];
    }
    std::span<const index_t> row_cols(index_t i) const {
        return {col_indices_.data() + row_offsets_[i],
                static_cast<std::size_t>(row_nnz(i))};
    }
    std::span<const real_t> row_vals(index_t i) const {
        return {values_.data() + row_offsets_[i],
                static_cast<std::size_t>(row_nnz(i))};
    }

    /// Throws DataError on any canonical-form violation.
    void validate() const;

    bool operator==(const SparseMatrix& other) const = default;

private:
    index_t n_rows_ = 0;
    index_t n_cols_ = 0;
    std::vector<index_t> row_offsets_{0};
    std::vector<index_t> col_indices_;
    std::vector<real_t> values_;
};

enum class Normalization {
    raw,
    row,
    sym,
};

const char* to_string(Normalization n);
Normalization normalization_from_string(const std::string& s);

/// Build canonical CSR from (row, col, value) triplets. Duplicates are
/// summed; entries that sum to zero are dropped.
SparseMatrix csr_from_coo(std::span<const Triplet> triplets, index_t n_rows,
                          index_t n_cols);

/// Sparse * dense product, (S.n_rows x D.n_cols).
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d);

SparseMatrix transpose(const SparseMatrix& s);

/// raw: unchanged. row: divide each row by its sum. sym: scale entry (i,j)
/// by 1/sqrt(rdeg(i)*cdeg(j)). Zero-sum rows/columns keep factor 1.
/// Requires non-negative entries.
SparseMatrix normalize(const SparseMatrix& s, Normalization mode);

/// Sparse * sparse product in canonical CSR (row-wise dense accumulation).
SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b);

DenseMatrix densify(const SparseMatrix& s);
SparseMatrix sparsify(const DenseMatrix& d);
SparseMatrix identity_sparse(index_t n);

std::vector<real_t> row_sums(const SparseMatrix& s);
std::vector<real_t> col_sums(const SparseMatrix& s);

/// Stack the rows of b below the rows of a (column counts must match).
SparseMatrix vstack(const SparseMatrix& a, const SparseMatrix& b);

/// Entrywise a + alpha * b on identical shapes.
SparseMatrix sparse_add(const SparseMatrix& a, const SparseMatrix& b,
                        real_t alpha = 1.0);

/// Copy with every stored value multiplied by alpha (alpha != 0).
SparseMatrix sparse_scale(const SparseMatrix& a, real_t alpha);

// COO text interchange: "n_rows n_cols nnz" header line, then one
// "row col value" line per entry, values with 17 significant digits.
// Readers reject files whose declared nnz mismatches the entry count.
void write_coo(std::ostream& out, const SparseMatrix& s);
void write_coo_file(const std::string& path, const SparseMatrix& s);
SparseMatrix read_coo(std::istream& in, const std::string& source = "<stream>");
SparseMatrix read_coo_file(const std::string& path);

} // namespace hetegcn
