#pragma once

#include <string>
#include <vector>

#include "hetegcn/corpus.hpp"
#include "hetegcn/graphs.hpp"
#include "hetegcn/model.hpp"
#include "hetegcn/types.hpp"

namespace hetegcn {

struct Prediction {
    std::string doc_id;
    index_t predicted = -1;     // argmax, lowest index on ties
    std::vector<real_t> probs;  // non-negative, sums to 1
};

/// Eval-mode forward on the training graph; rows selected by doc id.
/// Unknown ids raise DataError.
std::vector<Prediction> predict_transductive(
    const ArchitectureSpec& a, const ModelParams& p, const GraphSet& g,
    Normalization norm, const std::vector<std::string>& doc_ids);

/// Word embeddings stored at the input of the final X layer, together
/// with everything test-time reconstruction needs: the train idf, the
/// train-time normalization, and the train X column degrees (consumed by
/// sym scaling, whose test-time column factors reuse the train graph).
struct FeatureEmbeddings {
    DenseMatrix u; // m x d'
    std::string source_layer;
    Normalization normalization = Normalization::sym;
    std::vector<real_t> idf;
    std::vector<real_t> x_col_degrees;
    std::vector<std::string> vocab;
};

/// Supported for architectures ending in an X layer fed by a stored
/// word-level stage (F-X, TX-X, X-TX-X, fused chains); doc-entity
/// architectures (X-N, N-N) raise ConfigError.
FeatureEmbeddings export_feature_embeddings(const ArchitectureSpec& a,
                                            const ModelParams& p,
                                            const GraphSet& g,
                                            Normalization norm);

/// Document representations right before the final weight multiply
/// (the final layer's graph-aggregated input), n x d'.
DenseMatrix export_doc_embeddings(const ArchitectureSpec& a,
                                  const ModelParams& p, const GraphSet& g,
                                  Normalization norm);

struct InductiveResult {
    std::vector<Prediction> predictions; // corpus document order
    std::vector<std::string> all_oov_docs;
};

/// PTE-style inference: rebuild each test row with the train vocabulary
/// and idf (OOV tokens dropped), apply the train-time normalization, and
/// take softmax(X_test * U * W_final). Documents with every token OOV get
/// the uniform distribution and are reported in all_oov_docs.
InductiveResult predict_inductive(const FeatureEmbeddings& fe,
                                  const DenseMatrix& final_weights,
                                  const Corpus& test_docs);

/// Softmax linear probe: fit on labeled document embeddings, score every
/// word embedding, return per-class word indices ranked by class
/// probability (ties to the lower index), top_k capped at the vocabulary.
std::vector<std::vector<index_t>> class_salient_words(
    const DenseMatrix& doc_embeddings, const std::vector<index_t>& labels,
    index_t n_classes, const DenseMatrix& word_embeddings, index_t top_k,
    std::uint64_t seed = 0);

/// `doc_id<TAB>label<TAB>p_0 p_1 ...`; label is label_names[predicted]
/// when names are given, else the numeric class index.
void write_predictions_tsv(const std::string& path,
                           const std::vector<Prediction>& preds,
                           const std::vector<std::string>& label_names);

/// Directory layout: embeddings.tsv (`token<TAB>v_1 ... v_d`) plus
/// embeddings_meta.json (source layer, normalization, idf, col degrees).
void save_feature_embeddings(const std::string& dir,
                             const FeatureEmbeddings& fe);
FeatureEmbeddings load_feature_embeddings(const std::string& dir);

} // namespace hetegcn
