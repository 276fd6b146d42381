#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetegcn/corpus.hpp"
#include "hetegcn/sparse.hpp"
#include "hetegcn/types.hpp"

namespace hetegcn {

enum class GraphMode {
    transductive,
    inductive,
};

const char* to_string(GraphMode m);
GraphMode graph_mode_from_string(const std::string& s);

/// The relational graphs plus the row/word bookkeeping needed to train on
/// them. In inductive mode the rows cover train+val docs only and the
/// vocabulary is restricted to words seen in train docs.
struct GraphSet {
    GraphMode mode = GraphMode::transductive;
    SparseMatrix X;              // docs x words, TF-IDF
    SparseMatrix F;              // words x words, positive PMI, unit diagonal
    std::optional<SparseMatrix> N; // docs x docs, cosine kNN, unit diagonal
    std::vector<real_t> idf;     // per word
    std::vector<std::string> vocab;
    std::vector<std::string> doc_ids; // graph row -> doc id
    std::vector<index_t> labels;      // graph row -> class
    index_t n_classes = 0;
    // Graph-row indices of the split sets (test empty in inductive mode).
    std::vector<index_t> train_rows;
    std::vector<index_t> val_rows;
    std::vector<index_t> test_rows;

    index_t n_docs() const { return X.n_rows(); }
    index_t n_words() const { return X.n_cols(); }
};

struct TfidfResult {
    SparseMatrix X;
    std::vector<real_t> idf;
    index_t dropped_unseen = 0; // tf > 0 but df = 0 in the idf scope
};

/// X[d,w] = tf(d,w) * ln(|idf_scope| / df(w)); df = 0 gives idf 0 and the
/// entry is dropped (counted in dropped_unseen). Rows follow doc_rows order.
TfidfResult build_tfidf(const Corpus& c, const std::vector<index_t>& doc_rows,
                        const std::vector<index_t>& idf_rows);

/// Positive PMI over width-`window` sliding windows (a document shorter
/// than the window contributes exactly one window); counts use window-set
/// semantics (#W(i) = windows containing i at least once). Symmetric,
/// diagonal 1.0 on all words.
SparseMatrix build_pmi(const Corpus& c, const std::vector<index_t>& doc_rows,
                       index_t window);

/// Top-knn cosine neighbours per row (ties by lower index), symmetrized by
/// max, diagonal 1.0. Zero-norm rows keep only the self-loop.
SparseMatrix build_knn(const SparseMatrix& x, index_t knn);

struct GraphBuildConfig {
    index_t window = 20;
    index_t knn = 25;
    GraphMode mode = GraphMode::transductive;
    bool with_f = true;
    bool with_n = false;
};

GraphSet build_graphs(const Corpus& c, const SplitSet& s,
                      const GraphBuildConfig& cfg);

// Vocabulary TSV (`token<TAB>id`, dense ascending) and idf TSV
// (`token<TAB>idf`, 17 significant digits).
void write_vocab_tsv(const std::string& path,
                     const std::vector<std::string>& vocab);
std::vector<std::string> read_vocab_tsv(const std::string& path);
void write_idf_tsv(const std::string& path,
                   const std::vector<std::string>& vocab,
                   const std::vector<real_t>& idf);
std::vector<real_t> read_idf_tsv(const std::string& path,
                                 const std::vector<std::string>& vocab);

} // namespace hetegcn
