#include "hetegcn/baselines.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hetegcn/error.hpp"

namespace hetegcn {

namespace {

GraphSet linear_graphset(const SparseMatrix& features,
                         const std::vector<index_t>& labels,
                         index_t n_classes,
                         const std::vector<index_t>& train_rows,
                         const std::vector<index_t>& val_rows,
                         const std::vector<index_t>& test_rows) {
    if (static_cast<index_t>(labels.size()) != features.n_rows())
        throw ShapeError("labels length must equal the feature row count");
    GraphSet g;
    g.X = features;
    g.n_classes = n_classes;
    g.labels = labels;
    for (index_t i = 0; i < features.n_rows(); ++i)
        g.doc_ids.push_back("r" + std::to_string(i));
    for (index_t j = 0; j < features.n_cols(); ++j) {
        g.vocab.push_back("c" + std::to_string(j));
        g.idf.push_back(1.0);
    }
    g.train_rows = train_rows;
    g.val_rows = val_rows;
    g.test_rows = test_rows;
    return g;
}

ArchitectureSpec linear_arch(index_t d) {
    // A single raw X layer: P = softmax(features * W).
    return parse_architecture("X", InputMode::onehot, d, false);
}

TrainConfig lr_config(real_t c, const LrOptions& opts) {
    TrainConfig cfg;
    cfg.lr = opts.lr;
    cfg.emb_reg = 1.0 / c;
    cfg.normalization = Normalization::raw;
    cfg.max_epochs = opts.max_epochs;
    cfg.patience = opts.patience;
    cfg.seed = opts.seed;
    return cfg;
}

SweepResult lr_sweep(const GraphSet& g, const std::vector<real_t>& c_grid,
                     const LrOptions& opts) {
    if (c_grid.empty()) throw ConfigError("C grid is empty");
    std::vector<TrainConfig> grid;
    grid.reserve(c_grid.size());
    for (real_t c : c_grid) {
        if (!(c > 0.0)) throw ConfigError("C must be positive");
        grid.push_back(lr_config(c, opts));
    }
    SweepOptions sopts;
    sopts.parallel = opts.parallel;
    return sweep(linear_arch(g.n_words()), g, grid, sopts);
}

} // namespace

std::vector<real_t> default_c_grid() {
    std::vector<real_t> grid;
    for (int e = -5; e <= 5; ++e) grid.push_back(std::pow(10.0, e));
    return grid;
}

LinearModel train_lr(const SparseMatrix& features,
                     const std::vector<index_t>& labels, index_t n_classes,
                     const std::vector<index_t>& train_rows,
                     const std::vector<index_t>& val_rows,
                     const std::vector<index_t>& test_rows,
                     const std::vector<real_t>& c_grid,
                     const LrOptions& opts) {
    const GraphSet g = linear_graphset(features, labels, n_classes,
                                       train_rows, val_rows, test_rows);
    const SweepResult res = lr_sweep(g, c_grid, opts);

    LinearModel out;
    out.rows = res.rows;
    out.best_index = res.best_index;
    if (out.best_index < 0)
        throw TrainError("every C candidate failed");
    out.best_c = c_grid[static_cast<std::size_t>(out.best_index)];
    TrainResult winner =
        train(linear_arch(g.n_words()), g, lr_config(out.best_c, opts));
    out.params = std::move(winner.params);
    out.report = std::move(winner.report);
    return out;
}

DenseMatrix linear_probs(const SparseMatrix& features, const ModelParams& p) {
    if (p.weights.size() != 1)
        throw ShapeError("linear model must have exactly one weight matrix");
    if (features.n_cols() != p.weights[0].n_rows())
        throw ShapeError("feature width does not match the weight rows");
    DenseMatrix z = spmm(features, p.weights[0]);
    softmax_rows(z);
    return z;
}

SparseMatrix build_clightgcn_features(const SparseMatrix& x,
                                      const ClightgcnAlphas& alphas,
                                      bool row_normalize) {
    const index_t n = x.n_rows();
    const index_t m = x.n_cols();
    // Doc rows of the block powers: A contributes X in the word block,
    // A^2 contributes XX^T in the doc block, A^3 contributes XX^TX back
    // in the word block. Assembled via COO so zero alphas drop cleanly.
    std::vector<Triplet> trips;
    if (alphas[0] != 0.0) {
        for (index_t i = 0; i < n; ++i) trips.push_back({i, m + i, alphas[0]});
    }
    auto add_block = [&trips](const SparseMatrix& s, real_t alpha,
                              index_t col_offset) {
        if (alpha == 0.0) return;
        for (index_t i = 0; i < s.n_rows(); ++i) {
            for (index_t p = s.row_offsets()[i]; p < s.row_offsets()[i + 1];
                 ++p) {
                trips.push_back({i, col_offset + s.col_indices()[p],
                                 alpha * s.values()[p]});
            }
        }
    };
    add_block(x, alphas[1], 0);
    if (alphas[2] != 0.0 || alphas[3] != 0.0) {
        const SparseMatrix xxt = spgemm(x, transpose(x));
        add_block(xxt, alphas[2], m);
        if (alphas[3] != 0.0) add_block(spgemm(xxt, x), alphas[3], 0);
    }
    SparseMatrix feats = csr_from_coo(trips, n, m + n);
    if (row_normalize) feats = normalize(feats, Normalization::row);
    return feats;
}

std::vector<ClightgcnAlphas> default_alpha_grid() {
    const real_t levels[] = {0.0, 0.5, 1.0};
    std::vector<ClightgcnAlphas> grid;
    for (real_t a0 : levels)
        for (real_t a1 : levels)
            for (real_t a2 : levels)
                for (real_t a3 : levels) {
                    if (a0 == 0.0 && a1 == 0.0 && a2 == 0.0 && a3 == 0.0)
                        continue; // empty features
                    grid.push_back({a0, a1, a2, a3});
                }
    return grid;
}

ClightgcnResult train_clightgcn(const SparseMatrix& x,
                                const std::vector<index_t>& labels,
                                index_t n_classes,
                                const std::vector<index_t>& train_rows,
                                const std::vector<index_t>& val_rows,
                                const std::vector<index_t>& test_rows,
                                const std::vector<ClightgcnAlphas>& alpha_grid,
                                const std::vector<real_t>& c_grid,
                                const LrOptions& opts, bool row_normalize) {
    if (alpha_grid.empty()) throw ConfigError("alpha grid is empty");
    if (c_grid.empty()) throw ConfigError("C grid is empty");
    for (real_t c : c_grid)
        if (!(c > 0.0)) throw ConfigError("C must be positive");

    ClightgcnResult out;
    real_t best = -std::numeric_limits<real_t>::infinity();
    for (std::size_t ai = 0; ai < alpha_grid.size(); ++ai) {
        std::vector<SweepRow> rows;
        try {
            const SparseMatrix feats =
                build_clightgcn_features(x, alpha_grid[ai], row_normalize);
            const GraphSet g = linear_graphset(
                feats, labels, n_classes, train_rows, val_rows, test_rows);
            rows = lr_sweep(g, c_grid, opts).rows;
        } catch (const std::exception& e) {
            // Feature construction failed: mark every C for this alpha.
            for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
                SweepRow r;
                r.config_index = static_cast<index_t>(ci);
                r.config.emb_reg = 1.0 / c_grid[ci];
                r.val_micro_f1 = std::numeric_limits<real_t>::quiet_NaN();
                r.test_micro_f1 = std::numeric_limits<real_t>::quiet_NaN();
                r.test_macro_f1 = std::numeric_limits<real_t>::quiet_NaN();
                r.failed = true;
                r.error = e.what();
                rows.push_back(std::move(r));
            }
        }
        for (std::size_t ci = 0; ci < rows.size(); ++ci) {
            ClightgcnResult::Row row;
            row.alphas = alpha_grid[ai];
            row.sweep = rows[ci];
            const real_t score =
                row.sweep.failed || std::isnan(row.sweep.val_micro_f1)
                    ? -std::numeric_limits<real_t>::infinity()
                    : row.sweep.val_micro_f1;
            if (score > best) {
                best = score;
                out.best_index = static_cast<index_t>(out.rows.size());
                out.best_alphas = alpha_grid[ai];
                out.best_c = c_grid[ci];
            }
            out.rows.push_back(std::move(row));
        }
    }
    if (out.best_index < 0) {
        // All scores at -inf: fall back to the first non-failed row.
        for (std::size_t i = 0; i < out.rows.size(); ++i) {
            if (!out.rows[i].sweep.failed) {
                out.best_index = static_cast<index_t>(i);
                out.best_alphas = out.rows[i].alphas;
                out.best_c = c_grid[i % c_grid.size()];
                break;
            }
        }
    }
    if (out.best_index < 0)
        throw TrainError("every (alpha, C) configuration failed");

    out.features = build_clightgcn_features(x, out.best_alphas, row_normalize);
    const GraphSet g = linear_graphset(out.features, labels, n_classes,
                                       train_rows, val_rows, test_rows);
    TrainResult winner =
        train(linear_arch(g.n_words()), g, lr_config(out.best_c, opts));
    out.params = std::move(winner.params);
    return out;
}

BlockAdjacency block_adjacency(const SparseMatrix& x, const SparseMatrix* f,
                               bool include_f) {
    const index_t n = x.n_rows();
    const index_t m = x.n_cols();
    if (include_f) {
        if (f == nullptr)
            throw ConfigError("include_f requires a word-word graph");
        if (f->n_rows() != m || f->n_cols() != m)
            throw ShapeError("word-word graph is " +
                             std::to_string(f->n_rows()) + "x" +
                             std::to_string(f->n_cols()) +
                             ", expected " + std::to_string(m) + "x" +
                             std::to_string(m));
    }
    std::vector<Triplet> trips;
    if (include_f) {
        for (index_t i = 0; i < m; ++i) {
            for (index_t p = f->row_offsets()[i]; p < f->row_offsets()[i + 1];
                 ++p)
                trips.push_back({i, f->col_indices()[p], f->values()[p]});
        }
    }
    for (index_t i = 0; i < n; ++i) {
        for (index_t p = x.row_offsets()[i]; p < x.row_offsets()[i + 1]; ++p) {
            const index_t j = x.col_indices()[p];
            const real_t v = x.values()[p];
            trips.push_back({m + i, j, v}); // doc -> word
            trips.push_back({j, m + i, v}); // word -> doc
        }
    }
    BlockAdjacency out;
    out.a = csr_from_coo(trips, m + n, m + n);
    out.n_words = m;
    out.n_docs = n;
    out.include_f = include_f;
    return out;
}

#ifdef HETEGCN_ENABLE_TEXTGCN

BlockAdjacency textgcn_adjacency(const GraphSet& g) {
    return block_adjacency(g.X, &g.F, true);
}

GraphSet textgcn_graphset(const GraphSet& g) {
    const BlockAdjacency block = textgcn_adjacency(g);
    const index_t m = block.n_words;
    const index_t n = block.n_docs;
    GraphSet out;
    // X only fixes the node count for the trainer; N carries the graph.
    out.X = identity_sparse(m + n);
    out.N = block.a;
    out.n_classes = g.n_classes;
    out.idf = g.idf;
    out.vocab = g.vocab;
    out.labels.assign(static_cast<std::size_t>(m + n), 0);
    for (index_t j = 0; j < m; ++j)
        out.doc_ids.push_back("word:" + g.vocab[static_cast<std::size_t>(j)]);
    for (index_t i = 0; i < n; ++i) {
        out.doc_ids.push_back("doc:" + g.doc_ids[static_cast<std::size_t>(i)]);
        out.labels[static_cast<std::size_t>(m + i)] =
            g.labels[static_cast<std::size_t>(i)];
    }
    for (index_t r : g.train_rows) out.train_rows.push_back(m + r);
    for (index_t r : g.val_rows) out.val_rows.push_back(m + r);
    for (index_t r : g.test_rows) out.test_rows.push_back(m + r);
    return out;
}

#endif // HETEGCN_ENABLE_TEXTGCN

} // namespace hetegcn
