#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hetegcn/error.hpp"
#include "hetegcn/kernels.hpp"
#include "hetegcn/sparse.hpp"

namespace hetegcn {

namespace {

std::string shape_str(index_t r, index_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

} // namespace

SparseMatrix::SparseMatrix(index_t n_rows, index_t n_cols,
                           std::vector<index_t> row_offsets,
                           std::vector<index_t> col_indices,
                           std::vector<real_t> values)
    : n_rows_(n_rows), n_cols_(n_cols), row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)), values_(std::move(values)) {
    validate();
}

void SparseMatrix::validate() const {
    if (n_rows_ < 0 || n_cols_ < 0)
        throw DataError("negative sparse dimensions");
    if (row_offsets_.size() != static_cast<std::size_t>(n_rows_) + 1)
        throw DataError("row_offsets length must be n_rows+1");
    if (row_offsets_.front() != 0)
        throw DataError("row_offsets[0] must be 0");
    if (row_offsets_.back() != nnz())
        throw DataError("row_offsets back must equal nnz");
    if (col_indices_.size() != values_.size())
        throw DataError("col_indices/values length mismatch");
    for (index_t i = 0; i < n_rows_; ++i) {
        if (row_offsets_[i] > row_offsets_[i + 1])
            throw DataError("row_offsets must be non-decreasing at row " +
                            std::to_string(i));
        for (index_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            if (col_indices_[p] < 0 || col_indices_[p] >= n_cols_)
                throw DataError("column index out of range at row " +
                                std::to_string(i));
            if (p > row_offsets_[i] && col_indices_[p] <= col_indices_[p - 1])
                throw DataError("column indices not strictly increasing in row " +
                                std::to_string(i));
            if (values_[p] == 0.0)
                throw DataError("explicit zero stored at row " +
                                std::to_string(i));
            if (!std::isfinite(values_[p]))
                throw DataError("non-finite value at row " + std::to_string(i));
        }
    }
}

const char* to_string(Normalization n) {
    switch (n) {
        case Normalization::raw: return "raw";
        case Normalization::row: return "row";
        case Normalization::sym: return "sym";
    }
    return "?";
}

Normalization normalization_from_string(const std::string& s) {
    if (s == "raw") return Normalization::raw;
    if (s == "row") return Normalization::row;
    if (s == "sym") return Normalization::sym;
    throw ConfigError("unknown normalization mode: " + s);
}

SparseMatrix csr_from_coo(std::span<const Triplet> triplets, index_t n_rows,
                          index_t n_cols) {
    for (const Triplet& t : triplets) {
        if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols) {
            throw DataError("triplet (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ", " +
                            std::to_string(t.value) +
                            ") outside matrix of shape " +
                            shape_str(n_rows, n_cols));
        }
        if (!std::isfinite(t.value)) {
            throw DataError("non-finite triplet value at (" +
                            std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ")");
        }
    }

    std::vector<std::size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         const Triplet& x = triplets[a];
                         const Triplet& y = triplets[b];
                         return x.row != y.row ? x.row < y.row : x.col < y.col;
                     });

    std::vector<index_t> offsets(static_cast<std::size_t>(n_rows) + 1, 0);
    std::vector<index_t> cols;
    std::vector<real_t> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());

    std::size_t pos = 0;
    for (index_t r = 0; r < n_rows; ++r) {
        while (pos < order.size() && triplets[order[pos]].row == r) {
            const index_t c = triplets[order[pos]].col;
            real_t acc = 0.0;
            while (pos < order.size() && triplets[order[pos]].row == r &&
                   triplets[order[pos]].col == c) {
                acc += triplets[order[pos]].value;
                ++pos;
            }
            if (acc != 0.0) {
                cols.push_back(c);
                vals.push_back(acc);
            }
        }
        offsets[r + 1] = static_cast<index_t>(cols.size());
    }
    return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols),
                        std::move(vals));
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d) {
    if (s.n_cols() != d.n_rows()) {
        throw ShapeError("spmm shape mismatch: " +
                         shape_str(s.n_rows(), s.n_cols()) + " * " +
                         shape_str(d.n_rows(), d.n_cols()));
    }
    DenseMatrix out(s.n_rows(), d.n_cols());
    const std::size_t q = static_cast<std::size_t>(d.n_cols());
    const auto& offsets = s.row_offsets();
    const auto& cols = s.col_indices();
    const auto& vals = s.values();
    for (index_t i = 0; i < s.n_rows(); ++i) {
        real_t* out_row = out.row(i);
        for (index_t p = offsets[i]; p < offsets[i + 1]; ++p) {
            kernels::axpy(out_row, vals[p], d.row(cols[p]), q);
        }
    }
    return out;
}

SparseMatrix transpose(const SparseMatrix& s) {
    std::vector<index_t> offsets(static_cast<std::size_t>(s.n_cols()) + 1, 0);
    for (index_t c : s.col_indices()) offsets[c + 1]++;
    for (index_t c = 0; c < s.n_cols(); ++c) offsets[c + 1] += offsets[c];

    std::vector<index_t> cols(s.values().size());
    std::vector<real_t> vals(s.values().size());
    std::vector<index_t> cursor(offsets.begin(), offsets.end() - 1);
    for (index_t i = 0; i < s.n_rows(); ++i) {
        for (index_t p = s.row_offsets()[i]; p < s.row_offsets()[i + 1]; ++p) {
            const index_t dst = cursor[s.col_indices()[p]]++;
            cols[dst] = i;
            vals[dst] = s.values()[p];
        }
    }
    return SparseMatrix(s.n_cols(), s.n_rows(), std::move(offsets),
                        std::move(cols), std::move(vals));
}

SparseMatrix normalize(const SparseMatrix& s, Normalization mode) {
    for (real_t v : s.values()) {
        if (v < 0.0)
            throw DomainError("normalize requires non-negative entries");
    }
    if (mode == Normalization::raw) return s;

    std::vector<index_t> offsets = s.row_offsets();
    std::vector<index_t> cols = s.col_indices();
    std::vector<real_t> vals = s.values();

    if (mode == Normalization::row) {
        for (index_t i = 0; i < s.n_rows(); ++i) {
            real_t sum = 0.0;
            for (index_t p = offsets[i]; p < offsets[i + 1]; ++p)
                sum += vals[p];
            if (sum == 0.0) continue;
            for (index_t p = offsets[i]; p < offsets[i + 1]; ++p)
                vals[p] /= sum;
        }
    } else {
        std::vector<real_t> rdeg = row_sums(s);
        std::vector<real_t> cdeg = col_sums(s);
        for (real_t& d : rdeg) d = d == 0.0 ? 1.0 : 1.0 / std::sqrt(d);
        for (real_t& d : cdeg) d = d == 0.0 ? 1.0 : 1.0 / std::sqrt(d);
        for (index_t i = 0; i < s.n_rows(); ++i) {
            for (index_t p = offsets[i]; p < offsets[i + 1]; ++p)
                vals[p] *= rdeg[i] * cdeg[cols[p]];
        }
    }
    return SparseMatrix(s.n_rows(), s.n_cols(), std::move(offsets),
                        std::move(cols), std::move(vals));
}

SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.n_cols() != b.n_rows()) {
        throw ShapeError("spgemm shape mismatch: " +
                         shape_str(a.n_rows(), a.n_cols()) + " * " +
                         shape_str(b.n_rows(), b.n_cols()));
    }
    std::vector<index_t> offsets(static_cast<std::size_t>(a.n_rows()) + 1, 0);
    std::vector<index_t> cols;
    std::vector<real_t> vals;
    std::vector<real_t> acc(static_cast<std::size_t>(b.n_cols()), 0.0);
    std::vector<index_t> touched;
    touched.reserve(64);

    for (index_t i = 0; i < a.n_rows(); ++i) {
        touched.clear();
        for (index_t p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) {
            const index_t k = a.col_indices()[p];
            const real_t av = a.values()[p];
            for (index_t q = b.row_offsets()[k]; q < b.row_offsets()[k + 1];
                 ++q) {
                const index_t j = b.col_indices()[q];
                if (acc[j] == 0.0 &&
                    std::find(touched.begin(), touched.end(), j) ==
                        touched.end()) {
                    touched.push_back(j);
                }
                acc[j] += av * b.values()[q];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (index_t j : touched) {
            if (acc[j] != 0.0) {
                cols.push_back(j);
                vals.push_back(acc[j]);
            }
            acc[j] = 0.0;
        }
        offsets[i + 1] = static_cast<index_t>(cols.size());
    }
    return SparseMatrix(a.n_rows(), b.n_cols(), std::move(offsets),
                        std::move(cols), std::move(vals));
}

DenseMatrix densify(const SparseMatrix& s) {
    DenseMatrix out(s.n_rows(), s.n_cols());
    for (index_t i = 0; i < s.n_rows(); ++i) {
        for (index_t p = s.row_offsets()[i]; p < s.row_offsets()[i + 1]; ++p) {
            out(i, s.col_indices()[p]) = s.values()[p];
        }
    }
    return out;
}

SparseMatrix sparsify(const DenseMatrix& d) {
    std::vector<Triplet> trips;
    for (index_t i = 0; i < d.n_rows(); ++i) {
        for (index_t j = 0; j < d.n_cols(); ++j) {
            if (d(i, j) != 0.0) trips.push_back({i, j, d(i, j)});
        }
    }
    return csr_from_coo(trips, d.n_rows(), d.n_cols());
}

SparseMatrix identity_sparse(index_t n) {
    std::vector<index_t> offsets(static_cast<std::size_t>(n) + 1);
    std::vector<index_t> cols(static_cast<std::size_t>(n));
    std::vector<real_t> vals(static_cast<std::size_t>(n), 1.0);
    std::iota(offsets.begin(), offsets.end(), index_t{0});
    std::iota(cols.begin(), cols.end(), index_t{0});
    return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                        std::move(vals));
}

std::vector<real_t> row_sums(const SparseMatrix& s) {
    std::vector<real_t> sums(static_cast<std::size_t>(s.n_rows()), 0.0);
    for (index_t i = 0; i < s.n_rows(); ++i) {
        for (index_t p = s.row_offsets()[i]; p < s.row_offsets()[i + 1]; ++p)
            sums[i] += s.values()[p];
    }
    return sums;
}

std::vector<real_t> col_sums(const SparseMatrix& s) {
    std::vector<real_t> sums(static_cast<std::size_t>(s.n_cols()), 0.0);
    for (std::size_t p = 0; p < s.values().size(); ++p)
        sums[s.col_indices()[p]] += s.values()[p];
    return sums;
}

SparseMatrix vstack(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.n_cols() != b.n_cols()) {
        throw ShapeError("vstack column mismatch: " +
                         shape_str(a.n_rows(), a.n_cols()) + " over " +
                         shape_str(b.n_rows(), b.n_cols()));
    }
    std::vector<index_t> offsets;
    offsets.reserve(a.row_offsets().size() + b.row_offsets().size() - 1);
    offsets = a.row_offsets();
    const index_t base = a.nnz();
    for (std::size_t i = 1; i < b.row_offsets().size(); ++i)
        offsets.push_back(base + b.row_offsets()[i]);

    std::vector<index_t> cols = a.col_indices();
    cols.insert(cols.end(), b.col_indices().begin(), b.col_indices().end());
    std::vector<real_t> vals = a.values();
    vals.insert(vals.end(), b.values().begin(), b.values().end());
    return SparseMatrix(a.n_rows() + b.n_rows(), a.n_cols(),
                        std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix sparse_add(const SparseMatrix& a, const SparseMatrix& b,
                        real_t alpha) {
    if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols()) {
        throw ShapeError("sparse_add shape mismatch: " +
                         shape_str(a.n_rows(), a.n_cols()) + " vs " +
                         shape_str(b.n_rows(), b.n_cols()));
    }
    std::vector<Triplet> trips;
    trips.reserve(a.values().size() + b.values().size());
    for (index_t i = 0; i < a.n_rows(); ++i) {
        for (index_t p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p)
            trips.push_back({i, a.col_indices()[p], a.values()[p]});
        for (index_t p = b.row_offsets()[i]; p < b.row_offsets()[i + 1]; ++p)
            trips.push_back({i, b.col_indices()[p], alpha * b.values()[p]});
    }
    return csr_from_coo(trips, a.n_rows(), a.n_cols());
}

SparseMatrix sparse_scale(const SparseMatrix& a, real_t alpha) {
    if (alpha == 0.0)
        throw DomainError("sparse_scale by zero would store explicit zeros");
    std::vector<index_t> offsets = a.row_offsets();
    std::vector<index_t> cols = a.col_indices();
    std::vector<real_t> vals = a.values();
    for (real_t& v : vals) v *= alpha;
    return SparseMatrix(a.n_rows(), a.n_cols(), std::move(offsets),
                        std::move(cols), std::move(vals));
}

void write_coo(std::ostream& out, const SparseMatrix& s) {
    out << s.n_rows() << ' ' << s.n_cols() << ' ' << s.nnz() << '\n';
    char buf[64];
    for (index_t i = 0; i < s.n_rows(); ++i) {
        for (index_t p = s.row_offsets()[i]; p < s.row_offsets()[i + 1]; ++p) {
            std::snprintf(buf, sizeof(buf), "%.17g", s.values()[p]);
            out << i << ' ' << s.col_indices()[p] << ' ' << buf << '\n';
        }
    }
}

void write_coo_file(const std::string& path, const SparseMatrix& s) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    write_coo(out, s);
    if (!out) throw DataError("write failed: " + path);
}

SparseMatrix read_coo(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError(source + ": missing COO header line");
    index_t n_rows = 0, n_cols = 0, nnz = 0;
    {
        std::istringstream header(line);
        if (!(header >> n_rows >> n_cols >> nnz))
            throw DataError(source + ": malformed COO header: " + line);
    }
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(nnz));
    index_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Triplet t{};
        if (!(ls >> t.row >> t.col >> t.value))
            throw DataError(source + ": malformed COO entry: " + line);
        trips.push_back(t);
        ++seen;
    }
    if (seen != nnz) {
        throw DataError(source + ": declared nnz " + std::to_string(nnz) +
                        " but found " + std::to_string(seen) + " entries");
    }
    return csr_from_coo(trips, n_rows, n_cols);
}

SparseMatrix read_coo_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    return read_coo(in, path);
}

} // namespace hetegcn
