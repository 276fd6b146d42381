#include "hetegcn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hetegcn/error.hpp"
#include "hetegcn/kernels.hpp"
#include "hetegcn/metrics.hpp"
#include "hetegcn/trainer.hpp"

namespace hetegcn {

namespace {

std::string fmt_real(real_t v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ForwardTrace eval_forward(const ArchitectureSpec& a, const ModelParams& p,
                          const GraphSet& g, Normalization norm) {
    const CompiledGraphs cg = compile_graphs(g, norm, a);
    const SparseMatrix* xf =
        a.input_mode == InputMode::X_features ? &g.X : nullptr;
    Rng rng(0);
    return forward(a, p, cg, xf, nullptr, 0.0, false, rng);
}

std::vector<real_t> row_vector(const DenseMatrix& m, index_t i) {
    return std::vector<real_t>(m.row(i), m.row(i) + m.n_cols());
}

} // namespace

std::vector<Prediction> predict_transductive(
    const ArchitectureSpec& a, const ModelParams& p, const GraphSet& g,
    Normalization norm, const std::vector<std::string>& doc_ids) {
    const ForwardTrace trace = eval_forward(a, p, g, norm);
    const DenseMatrix& probs = trace.probs();
    const std::vector<index_t> arg = argmax_rows(probs);

    std::unordered_map<std::string, index_t> row_of;
    row_of.reserve(g.doc_ids.size());
    for (std::size_t i = 0; i < g.doc_ids.size(); ++i)
        row_of.emplace(g.doc_ids[i], static_cast<index_t>(i));

    std::vector<Prediction> out;
    out.reserve(doc_ids.size());
    for (const std::string& id : doc_ids) {
        const auto it = row_of.find(id);
        if (it == row_of.end())
            throw DataError("doc id '" + id + "' is not in the graph");
        Prediction pr;
        pr.doc_id = id;
        pr.predicted = arg[static_cast<std::size_t>(it->second)];
        pr.probs = row_vector(probs, it->second);
        out.push_back(std::move(pr));
    }
    return out;
}

FeatureEmbeddings export_feature_embeddings(const ArchitectureSpec& a,
                                            const ModelParams& p,
                                            const GraphSet& g,
                                            Normalization norm) {
    validate_architecture(a);
    const std::size_t last = a.layers.size() - 1;
    if (a.layers[last].graph != GraphToken::X)
        throw ConfigError("architecture '" + a.name +
                          "' has no stored word-level layer; induction "
                          "needs a final X layer");
    const ForwardTrace trace = eval_forward(a, p, g, norm);

    FeatureEmbeddings fe;
    if (last == 0) {
        if (!a.fuse)
            throw ConfigError("architecture '" + a.name +
                              "' feeds the final X layer from the one-hot "
                              "input; nothing to store");
        fe.u = trace.fused;
        fe.source_layer = "fused";
    } else {
        fe.u = trace.layers[last - 1].e_out;
        fe.source_layer = to_string(a.layers[last - 1].graph);
    }
    if (fe.u.n_rows() != g.n_words())
        throw ShapeError("stored embeddings are not vocabulary-aligned");
    fe.normalization = norm;
    fe.idf = g.idf;
    fe.x_col_degrees = col_sums(g.X);
    fe.vocab = g.vocab;
    return fe;
}

DenseMatrix export_doc_embeddings(const ArchitectureSpec& a,
                                  const ModelParams& p, const GraphSet& g,
                                  Normalization norm) {
    validate_architecture(a);
    const ForwardTrace trace = eval_forward(a, p, g, norm);
    const LayerTrace& final_layer = trace.layers.back();
    if (final_layer.kind != InputKind::dense)
        throw ConfigError("architecture '" + a.name +
                          "' has no aggregated document representation "
                          "before the final weights");
    return final_layer.b;
}

InductiveResult predict_inductive(const FeatureEmbeddings& fe,
                                  const DenseMatrix& final_weights,
                                  const Corpus& test_docs) {
    const index_t m = fe.u.n_rows();
    const index_t d = fe.u.n_cols();
    const index_t k = final_weights.n_cols();
    if (final_weights.n_rows() != d)
        throw ShapeError("embedding width " + std::to_string(d) +
                         " does not match final weight rows " +
                         std::to_string(final_weights.n_rows()));
    if (static_cast<index_t>(fe.vocab.size()) != m ||
        static_cast<index_t>(fe.idf.size()) != m ||
        static_cast<index_t>(fe.x_col_degrees.size()) != m)
        throw DataError("feature embeddings have inconsistent metadata");

    std::unordered_map<std::string, index_t> col_of;
    col_of.reserve(fe.vocab.size());
    for (std::size_t j = 0; j < fe.vocab.size(); ++j)
        col_of.emplace(fe.vocab[j], static_cast<index_t>(j));

    InductiveResult out;
    out.predictions.reserve(test_docs.docs.size());
    std::vector<real_t> acc(static_cast<std::size_t>(m), 0.0);
    std::vector<index_t> touched;
    for (std::size_t di = 0; di < test_docs.docs.size(); ++di) {
        touched.clear();
        for (index_t tid : test_docs.docs[di]) {
            const auto it =
                col_of.find(test_docs.vocab.tokens[static_cast<std::size_t>(tid)]);
            if (it == col_of.end()) continue; // OOV dropped
            if (acc[static_cast<std::size_t>(it->second)] == 0.0)
                touched.push_back(it->second);
            acc[static_cast<std::size_t>(it->second)] += 1.0;
        }
        std::sort(touched.begin(), touched.end());

        // tf * idf with the train idf; zero-idf tokens vanish exactly as
        // they do in the train graph.
        std::vector<index_t> cols;
        std::vector<real_t> vals;
        real_t row_sum = 0.0;
        for (index_t c : touched) {
            const real_t v =
                acc[static_cast<std::size_t>(c)] * fe.idf[static_cast<std::size_t>(c)];
            acc[static_cast<std::size_t>(c)] = 0.0;
            if (v == 0.0) continue;
            cols.push_back(c);
            vals.push_back(v);
            row_sum += v;
        }

        Prediction pr;
        pr.doc_id = test_docs.doc_ids[di];
        if (cols.empty()) {
            pr.probs.assign(static_cast<std::size_t>(k),
                            1.0 / static_cast<real_t>(k));
            pr.predicted = 0;
            out.all_oov_docs.push_back(pr.doc_id);
            out.predictions.push_back(std::move(pr));
            continue;
        }

        // Mirror normalize(): row mode divides by the row sum; sym mode
        // multiplies by 1/sqrt(row) * 1/sqrt(train column degree).
        if (fe.normalization == Normalization::row) {
            for (real_t& v : vals) v /= row_sum;
        } else if (fe.normalization == Normalization::sym) {
            const real_t r = row_sum == 0.0 ? 1.0 : 1.0 / std::sqrt(row_sum);
            for (std::size_t p = 0; p < vals.size(); ++p) {
                const real_t deg =
                    fe.x_col_degrees[static_cast<std::size_t>(cols[p])];
                const real_t c = deg == 0.0 ? 1.0 : 1.0 / std::sqrt(deg);
                vals[p] *= r * c;
            }
        }

        DenseMatrix emb(1, d);
        for (std::size_t p = 0; p < cols.size(); ++p)
            kernels::axpy(emb.data(), vals[p], fe.u.row(cols[p]),
                          static_cast<std::size_t>(d));
        DenseMatrix z = gemm_nn(emb, final_weights);
        softmax_rows(z);
        pr.probs = row_vector(z, 0);
        pr.predicted = argmax_rows(z)[0];
        out.predictions.push_back(std::move(pr));
    }
    return out;
}

std::vector<std::vector<index_t>> class_salient_words(
    const DenseMatrix& doc_embeddings, const std::vector<index_t>& labels,
    index_t n_classes, const DenseMatrix& word_embeddings, index_t top_k,
    std::uint64_t seed) {
    if (doc_embeddings.n_cols() != word_embeddings.n_cols())
        throw ShapeError("document/word embedding widths disagree");
    if (static_cast<index_t>(labels.size()) != doc_embeddings.n_rows())
        throw ShapeError("labels length must match document embeddings");
    if (n_classes < 1) throw ConfigError("n_classes must be positive");
    if (top_k < 1) throw ConfigError("top_k must be positive");

    // A single raw X layer over the embedding matrix is exactly a softmax
    // linear probe: P = softmax(E_docs * W).
    const index_t d = doc_embeddings.n_cols();
    GraphSet gs;
    gs.X = sparsify(doc_embeddings);
    gs.F = identity_sparse(d);
    gs.n_classes = n_classes;
    gs.labels = labels;
    for (index_t i = 0; i < doc_embeddings.n_rows(); ++i) {
        gs.doc_ids.push_back("e" + std::to_string(i));
        gs.train_rows.push_back(i);
    }
    for (index_t j = 0; j < d; ++j) {
        gs.vocab.push_back("f" + std::to_string(j));
        gs.idf.push_back(1.0);
    }
    const ArchitectureSpec probe =
        parse_architecture("X", InputMode::onehot, d, false);
    TrainConfig cfg;
    cfg.lr = 0.1;
    cfg.normalization = Normalization::raw;
    cfg.max_epochs = 200;
    cfg.seed = seed;
    const TrainResult fit = train(probe, gs, cfg);
    if (fit.report.diverged)
        throw TrainError("salient-word probe diverged: " +
                         fit.report.divergence_message);

    DenseMatrix scores = gemm_nn(word_embeddings, fit.params.weights[0]);
    softmax_rows(scores);

    const index_t m = word_embeddings.n_rows();
    const index_t take = std::min(top_k, m);
    std::vector<std::vector<index_t>> out(
        static_cast<std::size_t>(n_classes));
    std::vector<index_t> order(static_cast<std::size_t>(m));
    for (index_t c = 0; c < n_classes; ++c) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](index_t x, index_t y) {
                             return scores(x, c) > scores(y, c);
                         });
        out[static_cast<std::size_t>(c)]
            .assign(order.begin(), order.begin() + take);
    }
    return out;
}

void write_predictions_tsv(const std::string& path,
                           const std::vector<Prediction>& preds,
                           const std::vector<std::string>& label_names) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    for (const Prediction& p : preds) {
        out << p.doc_id << '\t';
        if (p.predicted >= 0 &&
            p.predicted < static_cast<index_t>(label_names.size())) {
            out << label_names[static_cast<std::size_t>(p.predicted)];
        } else {
            out << p.predicted;
        }
        out << '\t';
        for (std::size_t j = 0; j < p.probs.size(); ++j) {
            if (j) out << ' ';
            out << fmt_real(p.probs[j]);
        }
        out << '\n';
    }
    if (!out) throw DataError("failed writing " + path);
}

void save_feature_embeddings(const std::string& dir,
                             const FeatureEmbeddings& fe) {
    std::filesystem::create_directories(dir);
    const std::string tsv = dir + "/embeddings.tsv";
    std::ofstream out(tsv);
    if (!out) throw DataError("cannot open " + tsv + " for writing");
    for (index_t i = 0; i < fe.u.n_rows(); ++i) {
        out << fe.vocab[static_cast<std::size_t>(i)] << '\t';
        for (index_t j = 0; j < fe.u.n_cols(); ++j) {
            if (j) out << ' ';
            out << fmt_real(fe.u(i, j));
        }
        out << '\n';
    }
    if (!out) throw DataError("failed writing " + tsv);

    nlohmann::json meta;
    meta["source_layer"] = fe.source_layer;
    meta["normalization"] = to_string(fe.normalization);
    meta["idf"] = fe.idf;
    meta["x_col_degrees"] = fe.x_col_degrees;
    meta["dim"] = fe.u.n_cols();
    std::ofstream mout(dir + "/embeddings_meta.json");
    if (!mout) throw DataError("cannot open " + dir + "/embeddings_meta.json");
    mout << meta.dump(2) << '\n';
}

FeatureEmbeddings load_feature_embeddings(const std::string& dir) {
    const std::string meta_path = dir + "/embeddings_meta.json";
    std::ifstream min(meta_path);
    if (!min) throw DataError("cannot open " + meta_path);
    nlohmann::json meta;
    try {
        min >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path + ": " + e.what());
    }
    FeatureEmbeddings fe;
    try {
        fe.source_layer = meta.at("source_layer").get<std::string>();
        fe.normalization =
            normalization_from_string(meta.at("normalization").get<std::string>());
        fe.idf = meta.at("idf").get<std::vector<real_t>>();
        fe.x_col_degrees =
            meta.at("x_col_degrees").get<std::vector<real_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path + ": " + e.what());
    }
    const auto dim = meta.at("dim").get<index_t>();

    const std::string tsv = dir + "/embeddings.tsv";
    std::ifstream in(tsv);
    if (!in) throw DataError("cannot open " + tsv);
    std::vector<std::vector<real_t>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(tsv + ": line " + std::to_string(line_no) +
                            " has no tab separator");
        fe.vocab.push_back(line.substr(0, tab));
        std::istringstream vs(line.substr(tab + 1));
        std::vector<real_t> vals;
        real_t v;
        while (vs >> v) vals.push_back(v);
        if (static_cast<index_t>(vals.size()) != dim)
            throw DataError(tsv + ": line " + std::to_string(line_no) +
                            " has " + std::to_string(vals.size()) +
                            " values, expected " + std::to_string(dim));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw DataError(tsv + " is empty");
    fe.u = DenseMatrix(static_cast<index_t>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(),
                  fe.u.row(static_cast<index_t>(i)));
    if (fe.vocab.size() != rows.size() ||
        fe.idf.size() != rows.size() ||
        fe.x_col_degrees.size() != rows.size())
        throw DataError(dir + ": embeddings and metadata sizes disagree");
    return fe;
}

} // namespace hetegcn
