#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hetegcn/error.hpp"
#include "hetegcn/graphs.hpp"
#include "hetegcn/rng.hpp"

using namespace hetegcn;

namespace {

Corpus corpus_from(const std::string& tsv) {
    std::istringstream in(tsv);
    return load_corpus(in, "test.tsv");
}

std::vector<index_t> all_rows(const Corpus& c) {
    std::vector<index_t> rows(static_cast<std::size_t>(c.n_docs()));
    for (index_t i = 0; i < c.n_docs(); ++i) rows[i] = i;
    return rows;
}

// Exhaustive window-count oracle: enumerate every window as an explicit
// token-id set, then count memberships directly.
struct WindowCounts {
    std::int64_t total = 0;
    std::map<index_t, std::int64_t> word;
    std::map<std::pair<index_t, index_t>, std::int64_t> pair;
};

WindowCounts count_windows(const Corpus& c, index_t window) {
    WindowCounts wc;
    for (const auto& doc : c.docs) {
        const auto len = static_cast<index_t>(doc.size());
        const index_t n_windows = len <= window ? 1 : len - window + 1;
        const index_t width = std::min(window, len);
        for (index_t s = 0; s < n_windows; ++s) {
            wc.total++;
            std::set<index_t> uniq(doc.begin() + s, doc.begin() + s + width);
            for (auto a = uniq.begin(); a != uniq.end(); ++a) {
                wc.word[*a]++;
                for (auto b = std::next(a); b != uniq.end(); ++b)
                    wc.pair[{*a, *b}]++;
            }
        }
    }
    return wc;
}

// Brute-force cosine kNN oracle with the same tie and symmetrization rules.
SparseMatrix brute_force_knn(const SparseMatrix& x, index_t knn) {
    const index_t n = x.n_rows();
    const DenseMatrix d = densify(x);
    std::vector<real_t> norm(static_cast<std::size_t>(n), 0.0);
    for (index_t i = 0; i < n; ++i) {
        real_t sq = 0.0;
        for (index_t c = 0; c < d.n_cols(); ++c) sq += d(i, c) * d(i, c);
        norm[i] = std::sqrt(sq);
    }
    std::map<std::pair<index_t, index_t>, real_t> und;
    for (index_t i = 0; i < n; ++i) {
        std::vector<std::pair<real_t, index_t>> cand;
        for (index_t j = 0; j < n; ++j) {
            if (j == i) continue;
            real_t dot = 0.0;
            for (index_t c = 0; c < d.n_cols(); ++c) dot += d(i, c) * d(j, c);
            if (dot != 0.0) cand.push_back({dot / (norm[i] * norm[j]), j});
        }
        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        if (static_cast<index_t>(cand.size()) > knn) cand.resize(knn);
        for (const auto& [sim, j] : cand) {
            const auto key = std::minmax(i, j);
            auto [it, fresh] = und.try_emplace({key.first, key.second}, sim);
            if (!fresh) it->second = std::max(it->second, sim);
        }
    }
    std::vector<Triplet> trips;
    for (const auto& [key, sim] : und) {
        trips.push_back({key.first, key.second, sim});
        trips.push_back({key.second, key.first, sim});
    }
    for (index_t i = 0; i < n; ++i) trips.push_back({i, i, 1.0});
    return csr_from_coo(trips, n, n);
}

SparseMatrix random_doc_matrix(Rng& rng, index_t n, index_t m, double density) {
    std::vector<Triplet> trips;
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < m; ++j)
            if (rng.next_double() < density)
                trips.push_back({i, j, rng.next_double() + 0.25});
    return csr_from_coo(trips, n, m);
}

} // namespace

TEST_CASE("tfidf hand count") {
    const Corpus c = corpus_from("d1\tx\ta a b\nd2\ty\tb c\n");
    const TfidfResult r = build_tfidf(c, all_rows(c), all_rows(c));
    const index_t a = c.vocab.lookup("a");
    const index_t b = c.vocab.lookup("b");
    const index_t cc = c.vocab.lookup("c");

    CHECK(r.idf[a] == doctest::Approx(std::log(2.0)));
    CHECK(r.idf[b] == 0.0); // in every doc
    CHECK(r.idf[cc] == doctest::Approx(std::log(2.0)));

    const DenseMatrix x = densify(r.X);
    CHECK(x(0, a) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(x(0, a) == doctest::Approx(1.3863).epsilon(1e-4));
    CHECK(x(0, b) == 0.0); // idf 0 entries are absent
    CHECK(x(1, b) == 0.0);
    CHECK(x(1, cc) == doctest::Approx(std::log(2.0)));
    CHECK(r.X.nnz() == 2);
    CHECK(r.dropped_unseen == 0);
}

TEST_CASE("tfidf on a single-doc corpus is empty") {
    const Corpus c = corpus_from("d1\tx\ta b c\n");
    const TfidfResult r = build_tfidf(c, all_rows(c), all_rows(c));
    CHECK(r.X.nnz() == 0);
    for (real_t v : r.idf) CHECK(v == 0.0);
}

TEST_CASE("tfidf counts unseen-word drops") {
    // idf scope = {d1}; d2's word c has df 0 there.
    const Corpus c = corpus_from("d1\tx\ta b\nd2\ty\ta c c\n");
    const TfidfResult r = build_tfidf(c, all_rows(c), {0});
    CHECK(r.dropped_unseen == 1);
    CHECK(r.idf[c.vocab.lookup("a")] == 0.0); // ln(1/1)
    CHECK(r.idf[c.vocab.lookup("c")] == 0.0); // df 0
    CHECK(r.X.nnz() == 0); // every idf is zero against a 1-doc scope
}

TEST_CASE("pmi window-set example") {
    const Corpus c = corpus_from("d1\tx\ta b\nd2\ty\ta b\nd3\tz\tc\n");
    const SparseMatrix f = build_pmi(c, all_rows(c), 20);
    const index_t a = c.vocab.lookup("a");
    const index_t b = c.vocab.lookup("b");
    const index_t cc = c.vocab.lookup("c");

    const DenseMatrix fd = densify(f);
    // 3 windows; a and b share 2; PMI = ln(2*3/(2*2)) = ln 1.5.
    CHECK(fd(a, b) == doctest::Approx(std::log(1.5)).epsilon(1e-12));
    CHECK(fd(b, a) == fd(a, b));
    CHECK(fd(a, cc) == 0.0);
    for (index_t i = 0; i < f.n_rows(); ++i) CHECK(fd(i, i) == 1.0);
}

TEST_CASE("pmi drops non-positive edges") {
    const Corpus c = corpus_from("d1\tx\ta b\nd2\ty\ta c\n");
    const SparseMatrix f = build_pmi(c, all_rows(c), 20);
    const DenseMatrix fd = densify(f);
    // PMI(a,b) = ln(1*2/(2*1)) = 0, not strictly positive.
    CHECK(fd(c.vocab.lookup("a"), c.vocab.lookup("b")) == 0.0);
    for (real_t v : f.values()) CHECK(v > 0.0);
}

TEST_CASE("pmi matches exhaustive window oracle on long docs") {
    const Corpus c = corpus_from(
        "d1\tx\ta b c a d b e a c d\n"
        "d2\ty\tb d d e f a\n"
        "d3\tz\tf f g\n");
    const index_t window = 4; // shorter than docs: real sliding
    const SparseMatrix f = build_pmi(c, all_rows(c), window);
    const WindowCounts wc = count_windows(c, window);

    const DenseMatrix fd = densify(f);
    const index_t m = c.vocab_size();
    for (index_t i = 0; i < m; ++i) {
        for (index_t j = i + 1; j < m; ++j) {
            const auto it = wc.pair.find({i, j});
            if (it == wc.pair.end() || it->second == 0) {
                CHECK(fd(i, j) == 0.0);
                continue;
            }
            const real_t pmi = std::log(
                static_cast<real_t>(it->second * wc.total) /
                static_cast<real_t>(wc.word.at(i) * wc.word.at(j)));
            if (pmi > 0.0) {
                CHECK(fd(i, j) == doctest::Approx(pmi).epsilon(1e-12));
                CHECK(fd(j, i) == fd(i, j));
            } else {
                CHECK(fd(i, j) == 0.0);
            }
        }
    }
    // Bitwise symmetry with unit diagonal.
    CHECK(transpose(f) == f);
    for (index_t i = 0; i < m; ++i) CHECK(fd(i, i) == 1.0);
    CHECK_THROWS_AS(build_pmi(c, all_rows(c), 0), ConfigError);
}

TEST_CASE("knn on orthogonal rows") {
    // Rows: e1, e1, e2. knn=1.
    const SparseMatrix x = csr_from_coo(
        std::vector<Triplet>{{0, 0, 1.0}, {1, 0, 1.0}, {2, 1, 1.0}}, 3, 2);
    const SparseMatrix n = build_knn(x, 1);
    const DenseMatrix nd = densify(n);
    CHECK(nd(0, 1) == doctest::Approx(1.0));
    CHECK(nd(1, 0) == doctest::Approx(1.0));
    CHECK(nd(2, 0) == 0.0);
    CHECK(nd(2, 1) == 0.0);
    for (index_t i = 0; i < 3; ++i) CHECK(nd(i, i) == 1.0);
    CHECK(n.row_nnz(2) == 1); // self-loop only
}

TEST_CASE("knn matches brute-force oracle exactly") {
    Rng rng(301);
    const SparseMatrix x = random_doc_matrix(rng, 10, 8, 0.4);
    for (index_t knn : {1, 3, 5}) {
        const SparseMatrix got = build_knn(x, knn);
        const SparseMatrix want = brute_force_knn(x, knn);
        CHECK(got == want);
        CHECK(transpose(got) == got);
    }
}

TEST_CASE("knn degree bounds") {
    // Each row selects at most knn out-edges, so after max-symmetrization
    // the total edge count is bounded by n*(1 + 2*knn). A per-row bound of
    // 1 + 2*knn does not hold: a hub row chosen by many others accumulates
    // unbounded in-edges (seed 302 below produces an 8-entry row at knn=3).
    index_t hub_rows = 0;
    for (std::uint64_t seed : {302u, 303u, 304u}) {
        Rng rng(seed);
        const SparseMatrix x = random_doc_matrix(rng, 30, 12, 0.3);
        const index_t knn = 3;
        const SparseMatrix n = build_knn(x, knn);
        CHECK(n.nnz() <= n.n_rows() * (1 + 2 * knn));
        for (index_t i = 0; i < n.n_rows(); ++i) {
            CHECK(n.row_nnz(i) >= 1);
            if (n.row_nnz(i) > 1 + 2 * knn) hub_rows++;
        }
    }
    CHECK(hub_rows > 0);
}

TEST_CASE("knn rejects degenerate input") {
    const SparseMatrix x = identity_sparse(4);
    CHECK_THROWS_AS(build_knn(x, 0), ConfigError);
    CHECK_THROWS_AS(build_knn(identity_sparse(1), 1), DataError);
}

TEST_CASE("zero-norm rows get only the self-loop") {
    const SparseMatrix x = csr_from_coo(
        std::vector<Triplet>{{0, 0, 1.0}, {2, 0, 2.0}}, 3, 1);
    const SparseMatrix n = build_knn(x, 2);
    CHECK(n.row_nnz(1) == 1);
    CHECK(densify(n)(1, 1) == 1.0);
    for (real_t v : n.values()) CHECK(std::isfinite(v));
}

TEST_CASE("build_graphs transductive covers all docs") {
    const Corpus c = corpus_from(
        "d1\tx\tapple banana apple\n"
        "d2\ty\tbanana cherry\n"
        "d3\tx\tcherry date apple\n"
        "d4\ty\tdate banana\n");
    SplitSet s;
    s.train = {"d1", "d2"};
    s.val = {"d3"};
    s.test = {"d4"};
    GraphBuildConfig cfg;
    cfg.mode = GraphMode::transductive;
    cfg.with_n = true;
    const GraphSet g = build_graphs(c, s, cfg);
    CHECK(g.X.n_rows() == 4);
    CHECK(g.X.n_cols() == c.vocab_size());
    CHECK(g.F.n_rows() == c.vocab_size());
    CHECK(g.N.has_value());
    CHECK(g.N->n_rows() == 4);
    CHECK(g.train_rows == std::vector<index_t>{0, 1});
    CHECK(g.val_rows == std::vector<index_t>{2});
    CHECK(g.test_rows == std::vector<index_t>{3});
    CHECK(g.labels == std::vector<index_t>{0, 1, 0, 1});
}

TEST_CASE("build_graphs inductive restricts the vocabulary to train words") {
    const Corpus c = corpus_from(
        "d1\tx\tapple banana\n"
        "d2\ty\tbanana cherry\n"
        "d3\tx\tapple unseen\n"
        "d4\ty\tghost phantom\n");
    SplitSet s;
    s.train = {"d1", "d2"};
    s.val = {"d3"};
    s.test = {"d4"};
    GraphBuildConfig cfg;
    cfg.mode = GraphMode::inductive;
    const GraphSet g = build_graphs(c, s, cfg);

    // Rows: train+val only; test row absent.
    CHECK(g.X.n_rows() == 3);
    CHECK(g.doc_ids == std::vector<std::string>{"d1", "d2", "d3"});
    CHECK(g.test_rows.empty());

    // "unseen" occurs only in the val doc; ghost/phantom only in test.
    const auto& vocab = g.vocab;
    CHECK(std::find(vocab.begin(), vocab.end(), "unseen") == vocab.end());
    CHECK(std::find(vocab.begin(), vocab.end(), "ghost") == vocab.end());
    CHECK(vocab.size() == 3); // apple banana cherry
    CHECK(g.F.n_rows() == 3);
}

TEST_CASE("inductive idf differs from transductive when df differs") {
    const Corpus c = corpus_from(
        "d1\tx\tcommon rare\n"
        "d2\tx\tcommon word\n"
        "d3\ty\tcommon word\n"
        "d4\ty\tcommon rare\n"
        "d5\tx\tcommon rare word\n"
        "d6\ty\tcommon word extra\n");
    SplitSet s;
    s.train = {"d1", "d2", "d3"};
    s.val = {"d4"};
    s.test = {"d5", "d6"};

    GraphBuildConfig ind;
    ind.mode = GraphMode::inductive;
    ind.with_f = false;
    const GraphSet gi = build_graphs(c, s, ind);

    GraphBuildConfig tr;
    tr.mode = GraphMode::transductive;
    tr.with_f = false;
    const GraphSet gt = build_graphs(c, s, tr);

    // rare: df 1 of 3 train docs vs 3 of 6 docs; word: 2/3 vs 4/6.
    const auto gi_rare =
        std::find(gi.vocab.begin(), gi.vocab.end(), "rare") - gi.vocab.begin();
    const auto gt_rare =
        std::find(gt.vocab.begin(), gt.vocab.end(), "rare") - gt.vocab.begin();
    CHECK(gi.idf[gi_rare] == doctest::Approx(std::log(3.0)));
    CHECK(gt.idf[gt_rare] == doctest::Approx(std::log(2.0)));
    CHECK(gi.idf[gi_rare] != gt.idf[gt_rare]);
}

TEST_CASE("inductive X equals transductive X when train covers everything") {
    const Corpus c = corpus_from(
        "d1\tx\talpha beta\n"
        "d2\ty\tbeta gamma gamma\n"
        "d3\tx\talpha gamma delta\n");
    SplitSet all_train;
    all_train.train = {"d1", "d2", "d3"};
    GraphBuildConfig ind;
    ind.mode = GraphMode::inductive;
    ind.with_f = false;
    GraphBuildConfig tr;
    tr.mode = GraphMode::transductive;
    tr.with_f = false;
    const GraphSet gi = build_graphs(c, all_train, ind);
    const GraphSet gt = build_graphs(c, all_train, tr);
    CHECK(gi.X == gt.X);
    CHECK(gi.idf == gt.idf);
    CHECK(gi.vocab == gt.vocab);
}

TEST_CASE("vocab and idf TSV round trips") {
    const std::vector<std::string> vocab = {"alpha", "beta", "gamma"};
    const std::vector<real_t> idf = {0.0, std::log(1.5), 1.0 / 3.0};
    const std::string vpath = "test_vocab_tmp.tsv";
    const std::string ipath = "test_idf_tmp.tsv";
    write_vocab_tsv(vpath, vocab);
    write_idf_tsv(ipath, vocab, idf);
    CHECK(read_vocab_tsv(vpath) == vocab);
    const std::vector<real_t> back = read_idf_tsv(ipath, vocab);
    REQUIRE(back.size() == idf.size());
    for (std::size_t i = 0; i < idf.size(); ++i) CHECK(back[i] == idf[i]);
    CHECK_THROWS_AS(read_idf_tsv(ipath, {"alpha", "beta"}), DataError);
    std::remove(vpath.c_str());
    std::remove(ipath.c_str());
}
