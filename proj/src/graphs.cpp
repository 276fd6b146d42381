#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "hetegcn/error.hpp"
#include "hetegcn/graphs.hpp"

namespace hetegcn {

const char* to_string(GraphMode m) {
    return m == GraphMode::transductive ? "transductive" : "inductive";
}

GraphMode graph_mode_from_string(const std::string& s) {
    if (s == "transductive") return GraphMode::transductive;
    if (s == "inductive") return GraphMode::inductive;
    throw ConfigError("unknown graph mode: " + s);
}

namespace {

using Docs = std::vector<std::vector<index_t>>;

void check_scope(const Corpus& c, const std::vector<index_t>& rows,
                 const char* what) {
    if (rows.empty())
        throw DataError(std::string(what) + " scope is empty");
    for (index_t r : rows) {
        if (r < 0 || r >= c.n_docs())
            throw DataError(std::string(what) + " scope row out of range");
    }
}

TfidfResult tfidf_core(const Docs& docs, index_t m,
                       const std::vector<index_t>& doc_rows,
                       const std::vector<index_t>& idf_rows) {
    std::vector<index_t> df(static_cast<std::size_t>(m), 0);
    std::vector<index_t> seen(static_cast<std::size_t>(m), -1);
    for (std::size_t s = 0; s < idf_rows.size(); ++s) {
        for (index_t w : docs[idf_rows[s]]) {
            if (seen[w] != static_cast<index_t>(s)) {
                seen[w] = static_cast<index_t>(s);
                df[w]++;
            }
        }
    }

    TfidfResult result;
    result.idf.assign(static_cast<std::size_t>(m), 0.0);
    const auto n_idf = static_cast<real_t>(idf_rows.size());
    for (index_t w = 0; w < m; ++w) {
        if (df[w] > 0)
            result.idf[w] = std::log(n_idf / static_cast<real_t>(df[w]));
    }

    std::vector<Triplet> trips;
    std::vector<index_t> tf(static_cast<std::size_t>(m), 0);
    std::vector<index_t> touched;
    for (std::size_t r = 0; r < doc_rows.size(); ++r) {
        touched.clear();
        for (index_t w : docs[doc_rows[r]]) {
            if (tf[w] == 0) touched.push_back(w);
            tf[w]++;
        }
        std::sort(touched.begin(), touched.end());
        for (index_t w : touched) {
            if (df[w] == 0) {
                result.dropped_unseen++;
            } else {
                const real_t v = static_cast<real_t>(tf[w]) * result.idf[w];
                if (v != 0.0)
                    trips.push_back({static_cast<index_t>(r), w, v});
            }
            tf[w] = 0;
        }
    }
    result.X = csr_from_coo(trips, static_cast<index_t>(doc_rows.size()), m);
    return result;
}

SparseMatrix pmi_core(const Docs& docs, index_t m,
                      const std::vector<index_t>& doc_rows, index_t window) {
    if (window < 1) throw ConfigError("PMI window must be >= 1");

    std::vector<std::int64_t> word_windows(static_cast<std::size_t>(m), 0);
    std::unordered_map<std::int64_t, std::int64_t> pair_windows;
    std::int64_t total_windows = 0;

    std::vector<index_t> uniq;
    for (index_t r : doc_rows) {
        const std::vector<index_t>& doc = docs[r];
        const auto len = static_cast<index_t>(doc.size());
        if (len == 0) continue;
        const index_t n_windows = len <= window ? 1 : len - window + 1;
        const index_t width = std::min(window, len);
        for (index_t s = 0; s < n_windows; ++s) {
            ++total_windows;
            uniq.assign(doc.begin() + s, doc.begin() + s + width);
            std::sort(uniq.begin(), uniq.end());
            uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
            for (std::size_t a = 0; a < uniq.size(); ++a) {
                word_windows[uniq[a]]++;
                for (std::size_t b = a + 1; b < uniq.size(); ++b) {
                    pair_windows[uniq[a] * m + uniq[b]]++;
                }
            }
        }
    }

    std::vector<Triplet> trips;
    for (const auto& [key, count] : pair_windows) {
        const index_t i = static_cast<index_t>(key / m);
        const index_t j = static_cast<index_t>(key % m);
        const real_t num =
            static_cast<real_t>(count) * static_cast<real_t>(total_windows);
        const real_t den = static_cast<real_t>(word_windows[i]) *
                           static_cast<real_t>(word_windows[j]);
        const real_t pmi = std::log(num / den);
        if (pmi > 0.0) {
            trips.push_back({i, j, pmi});
            trips.push_back({j, i, pmi});
        }
    }
    for (index_t i = 0; i < m; ++i) trips.push_back({i, i, 1.0});
    return csr_from_coo(trips, m, m);
}

} // namespace

TfidfResult build_tfidf(const Corpus& c, const std::vector<index_t>& doc_rows,
                        const std::vector<index_t>& idf_rows) {
    check_scope(c, doc_rows, "doc");
    check_scope(c, idf_rows, "idf");
    return tfidf_core(c.docs, c.vocab_size(), doc_rows, idf_rows);
}

SparseMatrix build_pmi(const Corpus& c, const std::vector<index_t>& doc_rows,
                       index_t window) {
    check_scope(c, doc_rows, "doc");
    return pmi_core(c.docs, c.vocab_size(), doc_rows, window);
}

SparseMatrix build_knn(const SparseMatrix& x, index_t knn) {
    if (knn < 1) throw ConfigError("knn must be >= 1");
    if (x.n_rows() < 2) throw DataError("kNN needs at least 2 rows");

    const index_t n = x.n_rows();
    std::vector<real_t> norm(static_cast<std::size_t>(n), 0.0);
    for (index_t i = 0; i < n; ++i) {
        real_t sq = 0.0;
        for (real_t v : x.row_vals(i)) sq += v * v;
        norm[i] = std::sqrt(sq);
    }

    // Column postings give each row's overlapping partners; accumulating
    // over row i's columns in ascending order keeps the dot-product
    // summation order identical to a dense ascending-column loop.
    const SparseMatrix xt = transpose(x);

    struct Edge {
        index_t to;
        real_t sim;
    };
    std::vector<std::vector<Edge>> directed(static_cast<std::size_t>(n));
    std::vector<real_t> acc(static_cast<std::size_t>(n), 0.0);
    std::vector<index_t> touched;
    for (index_t i = 0; i < n; ++i) {
        touched.clear();
        const auto cols = x.row_cols(i);
        const auto vals = x.row_vals(i);
        for (std::size_t p = 0; p < cols.size(); ++p) {
            const auto partners = xt.row_cols(cols[p]);
            const auto weights = xt.row_vals(cols[p]);
            for (std::size_t q = 0; q < partners.size(); ++q) {
                const index_t j = partners[q];
                if (j == i) continue;
                if (acc[j] == 0.0) touched.push_back(j);
                acc[j] += vals[p] * weights[q];
            }
        }
        std::vector<Edge> cand;
        cand.reserve(touched.size());
        for (index_t j : touched) {
            if (acc[j] != 0.0)
                cand.push_back({j, acc[j] / (norm[i] * norm[j])});
            acc[j] = 0.0;
        }
        std::sort(cand.begin(), cand.end(), [](const Edge& a, const Edge& b) {
            return a.sim != b.sim ? a.sim > b.sim : a.to < b.to;
        });
        if (static_cast<index_t>(cand.size()) > knn) cand.resize(knn);
        directed[i] = std::move(cand);
    }

    // max-symmetrization: keep the larger direction of each edge.
    std::unordered_map<std::int64_t, real_t> undirected;
    for (index_t i = 0; i < n; ++i) {
        for (const Edge& e : directed[i]) {
            const index_t a = std::min(i, e.to);
            const index_t b = std::max(i, e.to);
            auto [it, fresh] = undirected.try_emplace(a * n + b, e.sim);
            if (!fresh) it->second = std::max(it->second, e.sim);
        }
    }

    std::vector<Triplet> trips;
    trips.reserve(2 * undirected.size() + static_cast<std::size_t>(n));
    for (const auto& [key, sim] : undirected) {
        const index_t a = static_cast<index_t>(key / n);
        const index_t b = static_cast<index_t>(key % n);
        trips.push_back({a, b, sim});
        trips.push_back({b, a, sim});
    }
    for (index_t i = 0; i < n; ++i) trips.push_back({i, i, 1.0});
    return csr_from_coo(trips, n, n);
}

GraphSet build_graphs(const Corpus& c, const SplitSet& s,
                      const GraphBuildConfig& cfg) {
    const SplitIndices idx = resolve_split(c, s);
    if (idx.train.empty()) throw DataError("split has no train documents");

    GraphSet g;
    g.mode = cfg.mode;
    g.n_classes = c.n_classes();

    if (cfg.mode == GraphMode::transductive) {
        std::vector<index_t> all(static_cast<std::size_t>(c.n_docs()));
        std::iota(all.begin(), all.end(), index_t{0});

        TfidfResult tf = build_tfidf(c, all, all);
        g.X = std::move(tf.X);
        g.idf = std::move(tf.idf);
        if (cfg.with_f) g.F = build_pmi(c, all, cfg.window);
        if (cfg.with_n) g.N = build_knn(g.X, cfg.knn);

        g.vocab = c.vocab.tokens;
        g.doc_ids = c.doc_ids;
        g.labels = c.labels;
        g.train_rows = idx.train;
        g.val_rows = idx.val;
        g.test_rows = idx.test;
        return g;
    }

    // Inductive: rows are train+val docs; idf, PMI and the vocabulary come
    // from train docs alone, and unseen words vanish from val docs.
    std::vector<index_t> keep = idx.train;
    keep.insert(keep.end(), idx.val.begin(), idx.val.end());
    std::sort(keep.begin(), keep.end());

    std::vector<bool> in_train(static_cast<std::size_t>(c.n_docs()), false);
    for (index_t r : idx.train) in_train[r] = true;

    std::vector<index_t> remap(static_cast<std::size_t>(c.vocab_size()), -1);
    for (index_t r : idx.train) {
        for (index_t w : c.docs[r]) {
            if (remap[w] < 0) remap[w] = 0;
        }
    }
    index_t next_id = 0;
    for (index_t w = 0; w < c.vocab_size(); ++w) {
        if (remap[w] == 0) {
            remap[w] = next_id++;
            g.vocab.push_back(c.vocab.tokens[w]);
        }
    }
    const index_t m = next_id;
    if (m == 0) throw DataError("train documents contain no words");

    Docs docs(static_cast<std::size_t>(c.n_docs()));
    std::vector<index_t> row_of(static_cast<std::size_t>(c.n_docs()), -1);
    std::vector<index_t> doc_rows;
    std::vector<index_t> idf_rows;
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const index_t src = keep[r];
        for (index_t w : c.docs[src])
            if (remap[w] >= 0) docs[src].push_back(remap[w]);
        row_of[src] = static_cast<index_t>(r);
        doc_rows.push_back(src);
        if (in_train[src]) idf_rows.push_back(src);
        g.doc_ids.push_back(c.doc_ids[src]);
        g.labels.push_back(c.labels[src]);
    }

    TfidfResult tf = tfidf_core(docs, m, doc_rows, idf_rows);
    g.X = std::move(tf.X);
    g.idf = std::move(tf.idf);
    if (cfg.with_f) g.F = pmi_core(docs, m, idf_rows, cfg.window);
    if (cfg.with_n) g.N = build_knn(g.X, cfg.knn);

    for (index_t r : idx.train) g.train_rows.push_back(row_of[r]);
    for (index_t r : idx.val) g.val_rows.push_back(row_of[r]);
    std::sort(g.train_rows.begin(), g.train_rows.end());
    std::sort(g.val_rows.begin(), g.val_rows.end());
    return g;
}

void write_vocab_tsv(const std::string& path,
                     const std::vector<std::string>& vocab) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (std::size_t w = 0; w < vocab.size(); ++w)
        out << vocab[w] << '\t' << w << '\n';
    if (!out) throw DataError("write failed: " + path);
}

std::vector<std::string> read_vocab_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocab: " + path);
    std::vector<std::string> vocab;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected token<TAB>id");
        const std::string token = line.substr(0, tab);
        const long long id = std::stoll(line.substr(tab + 1));
        if (id != static_cast<long long>(vocab.size()))
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": vocab ids must be dense ascending");
        vocab.push_back(token);
    }
    return vocab;
}

void write_idf_tsv(const std::string& path,
                   const std::vector<std::string>& vocab,
                   const std::vector<real_t>& idf) {
    if (vocab.size() != idf.size())
        throw ShapeError("vocab/idf size mismatch");
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    char buf[64];
    for (std::size_t w = 0; w < vocab.size(); ++w) {
        std::snprintf(buf, sizeof(buf), "%.17g", idf[w]);
        out << vocab[w] << '\t' << buf << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<real_t> read_idf_tsv(const std::string& path,
                                 const std::vector<std::string>& vocab) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open idf: " + path);
    std::vector<real_t> idf;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected token<TAB>idf");
        const std::string token = line.substr(0, tab);
        if (idf.size() >= vocab.size() || token != vocab[idf.size()])
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": token order does not match vocabulary");
        idf.push_back(std::stod(line.substr(tab + 1)));
    }
    if (idf.size() != vocab.size())
        throw DataError(path + ": idf entry count does not match vocabulary");
    return idf;
}

} // namespace hetegcn
