#pragma once

#include <array>
#include <string>
#include <vector>

#include "hetegcn/graphs.hpp"
#include "hetegcn/model.hpp"
#include "hetegcn/trainer.hpp"
#include "hetegcn/types.hpp"

namespace hetegcn {

/// C (inverse L2 strength) candidates 1e-5..1e5 in powers of ten.
std::vector<real_t> default_c_grid();

struct LrOptions {
    real_t lr = 0.1;
    index_t max_epochs = 300;
    index_t patience = 30;
    std::uint64_t seed = 0;
    index_t parallel = 1;
};

struct LinearModel {
    std::vector<SweepRow> rows; // one per C, grid order
    index_t best_index = -1;
    real_t best_c = 0.0;
    ModelParams params; // winner's weights, retrained deterministically
    TrainReport report; // winner's training report
};

/// Multinomial softmax regression on sparse feature rows, full-batch via
/// the shared trainer; L2 strength 1/C, C chosen on validation micro-F1
/// (ties to the earlier grid entry). Throws ConfigError on an empty or
/// non-positive grid, TrainError when every candidate fails.
LinearModel train_lr(const SparseMatrix& features,
                     const std::vector<index_t>& labels, index_t n_classes,
                     const std::vector<index_t>& train_rows,
                     const std::vector<index_t>& val_rows,
                     const std::vector<index_t>& test_rows,
                     const std::vector<real_t>& c_grid,
                     const LrOptions& opts = {});

/// Class probabilities of a fitted linear model on raw feature rows.
DenseMatrix linear_probs(const SparseMatrix& features, const ModelParams& p);

using ClightgcnAlphas = std::array<real_t, 4>;

/// Document rows of a0*I + a1*A + a2*A^2 + a3*A^3 over the bipartite
/// block adjacency A = [[0, X^T], [X, 0]] (words 0..m-1, docs m..m+n-1),
/// computed blockwise: word block a1*X + a3*XX^TX, doc block
/// a0*I + a2*XX^T. Output is n x (m+n).
SparseMatrix build_clightgcn_features(const SparseMatrix& x,
                                      const ClightgcnAlphas& alphas,
                                      bool row_normalize = false);

/// Every alpha in {0, 0.5, 1}^4.
std::vector<ClightgcnAlphas> default_alpha_grid();

struct ClightgcnResult {
    struct Row {
        ClightgcnAlphas alphas{};
        SweepRow sweep; // per-C stats; sweep.config.emb_reg = 1/C
    };
    std::vector<Row> rows; // alpha-major, C-minor
    index_t best_index = -1;
    ClightgcnAlphas best_alphas{};
    real_t best_c = 0.0;
    ModelParams params;    // winner retrained
    SparseMatrix features; // winner's feature rows
};

/// Joint (alpha, C) grid search; per-run failures are recorded and the
/// search continues. Ties resolve to the earlier grid order.
ClightgcnResult train_clightgcn(const SparseMatrix& x,
                                const std::vector<index_t>& labels,
                                index_t n_classes,
                                const std::vector<index_t>& train_rows,
                                const std::vector<index_t>& val_rows,
                                const std::vector<index_t>& test_rows,
                                const std::vector<ClightgcnAlphas>& alpha_grid,
                                const std::vector<real_t>& c_grid,
                                const LrOptions& opts = {},
                                bool row_normalize = false);

/// Symmetric (m+n)-node graph; words 0..m-1, docs m..m+n-1. With
/// include_f the word-word block carries F, otherwise it is zero; the
/// doc-doc block is always zero.
struct BlockAdjacency {
    SparseMatrix a;
    index_t n_words = 0;
    index_t n_docs = 0;
    bool include_f = false;
};

BlockAdjacency block_adjacency(const SparseMatrix& x, const SparseMatrix* f,
                               bool include_f);

#ifdef HETEGCN_ENABLE_TEXTGCN
/// TextGCN adjacency: F top-left, X^T top-right, X bottom-left.
BlockAdjacency textgcn_adjacency(const GraphSet& g);

/// Lift the corpus graphs onto the (m+n)-node block graph so the shared
/// trainer runs TextGCN as architecture N-N over one-hot nodes with the
/// loss masked to document rows.
GraphSet textgcn_graphset(const GraphSet& g);
#endif

} // namespace hetegcn
