#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hetegcn/corpus.hpp"
#include "hetegcn/error.hpp"
#include "hetegcn/rng.hpp"

namespace hetegcn {

index_t Vocab::add(const std::string& token) {
    auto [it, inserted] = ids.try_emplace(token, size());
    if (inserted) tokens.push_back(token);
    return it->second;
}

index_t Vocab::lookup(const std::string& token) const {
    auto it = ids.find(token);
    return it == ids.end() ? -1 : it->second;
}

index_t Corpus::doc_index(const std::string& id) const {
    auto it = doc_lookup.find(id);
    return it == doc_lookup.end() ? -1 : it->second;
}

Corpus load_corpus(std::istream& in, const std::string& source) {
    Corpus c;
    std::unordered_map<std::string, index_t> label_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto tab1 = line.find('\t');
        const auto tab2 =
            tab1 == std::string::npos ? std::string::npos
                                      : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos ||
            line.find('\t', tab2 + 1) != std::string::npos) {
            throw DataError(source + ":" + std::to_string(line_no) +
                            ": expected 3 tab-separated fields");
        }
        const std::string doc_id = line.substr(0, tab1);
        const std::string label = line.substr(tab1 + 1, tab2 - tab1 - 1);
        const std::string text = line.substr(tab2 + 1);
        if (doc_id.empty() || label.empty()) {
            throw DataError(source + ":" + std::to_string(line_no) +
                            ": empty doc_id or label");
        }
        if (c.doc_lookup.count(doc_id)) {
            throw DataError(source + ":" + std::to_string(line_no) +
                            ": duplicate doc_id '" + doc_id + "'");
        }

        std::vector<index_t> tokens;
        std::istringstream ts(text);
        std::string tok;
        while (ts >> tok) tokens.push_back(c.vocab.add(tok));
        if (tokens.empty()) {
            throw DataError(source + ":" + std::to_string(line_no) +
                            ": empty token list for doc '" + doc_id + "'");
        }

        auto [lit, fresh] =
            label_ids.try_emplace(label, static_cast<index_t>(label_ids.size()));
        if (fresh) c.label_names.push_back(label);

        c.doc_lookup.emplace(doc_id, c.n_docs());
        c.docs.push_back(std::move(tokens));
        c.labels.push_back(lit->second);
        c.doc_ids.push_back(doc_id);
    }
    if (c.docs.empty()) throw DataError(source + ": corpus has no documents");
    return c;
}

Corpus load_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus: " + path);
    return load_corpus(in, path);
}

std::unordered_set<std::string> load_stopwords_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stopword file: " + path);
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) words.insert(line);
    }
    return words;
}

std::vector<index_t> token_frequencies(const Corpus& c) {
    std::vector<index_t> freq(static_cast<std::size_t>(c.vocab_size()), 0);
    for (const auto& doc : c.docs)
        for (index_t t : doc) freq[t]++;
    return freq;
}

PreprocessResult preprocess(const Corpus& c,
                            const std::unordered_set<std::string>& stopwords,
                            index_t min_count, bool skip_filtering) {
    if (min_count < 0) throw ConfigError("min_count must be >= 0");
    if (skip_filtering) return {c, {}};

    const std::vector<index_t> freq = token_frequencies(c);
    std::vector<index_t> remap(freq.size(), -1);
    Vocab kept;
    for (index_t t = 0; t < c.vocab_size(); ++t) {
        if (freq[t] >= min_count && !stopwords.count(c.vocab.tokens[t])) {
            remap[t] = kept.add(c.vocab.tokens[t]);
        }
    }

    PreprocessResult result;
    result.corpus.vocab = std::move(kept);
    result.corpus.label_names = c.label_names;
    for (index_t i = 0; i < c.n_docs(); ++i) {
        std::vector<index_t> doc;
        doc.reserve(c.docs[i].size());
        for (index_t t : c.docs[i])
            if (remap[t] >= 0) doc.push_back(remap[t]);
        if (doc.empty()) {
            result.dropped_doc_ids.push_back(c.doc_ids[i]);
            continue;
        }
        result.corpus.doc_lookup.emplace(c.doc_ids[i],
                                         result.corpus.n_docs());
        result.corpus.docs.push_back(std::move(doc));
        result.corpus.labels.push_back(c.labels[i]);
        result.corpus.doc_ids.push_back(c.doc_ids[i]);
    }
    if (result.corpus.docs.empty())
        throw DataError("preprocessing removed every document");
    return result;
}

namespace {

index_t stratified_count(double fraction, index_t class_size) {
    return std::max<index_t>(
        1, static_cast<index_t>(std::llround(fraction * class_size)));
}

std::vector<std::string> ids_in_corpus_order(const Corpus& c,
                                             std::vector<index_t> rows) {
    std::sort(rows.begin(), rows.end());
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (index_t r : rows) ids.push_back(c.doc_ids[r]);
    return ids;
}

} // namespace

SplitSet split_standard(const Corpus& c,
                        const std::vector<std::string>& test_ids,
                        double val_fraction, std::uint64_t seed,
                        bool stratified_val) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ConfigError("val_fraction must be in (0, 1)");

    std::unordered_set<index_t> test_rows;
    for (const std::string& id : test_ids) {
        const index_t row = c.doc_index(id);
        if (row < 0) throw DataError("unknown test doc_id '" + id + "'");
        test_rows.insert(row);
    }

    std::vector<index_t> pool;
    for (index_t i = 0; i < c.n_docs(); ++i)
        if (!test_rows.count(i)) pool.push_back(i);
    if (pool.empty()) throw DataError("no non-test documents to split");

    Rng rng(derive_seed(seed, "split/val"));
    std::vector<index_t> val_rows;
    std::vector<index_t> train_rows;
    if (!stratified_val) {
        rng.shuffle(pool);
        const auto n_val = static_cast<std::size_t>(
            std::llround(val_fraction * static_cast<double>(pool.size())));
        val_rows.assign(pool.begin(), pool.begin() + n_val);
        train_rows.assign(pool.begin() + n_val, pool.end());
    } else {
        std::vector<std::vector<index_t>> by_class(
            static_cast<std::size_t>(c.n_classes()));
        for (index_t row : pool) by_class[c.labels[row]].push_back(row);
        for (auto& rows : by_class) {
            if (rows.empty()) continue;
            rng.shuffle(rows);
            const auto n_val = static_cast<std::size_t>(std::llround(
                val_fraction * static_cast<double>(rows.size())));
            val_rows.insert(val_rows.end(), rows.begin(), rows.begin() + n_val);
            train_rows.insert(train_rows.end(), rows.begin() + n_val,
                              rows.end());
        }
    }

    SplitSet s;
    s.train = ids_in_corpus_order(c, std::move(train_rows));
    s.val = ids_in_corpus_order(c, std::move(val_rows));
    s.test = test_ids;
    return s;
}

std::vector<SplitSet> split_small_label(const SplitSet& base, const Corpus& c,
                                        const std::vector<double>& fractions,
                                        int repeats, std::uint64_t seed) {
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (fractions.empty()) throw ConfigError("no label fractions given");
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] > 0.0 && fractions[i] <= 100.0))
            throw ConfigError("label fraction must be in (0, 100]");
        if (i > 0 && fractions[i] <= fractions[i - 1])
            throw ConfigError("label fractions must be strictly ascending");
    }

    std::vector<std::vector<index_t>> by_class(
        static_cast<std::size_t>(c.n_classes()));
    for (const std::string& id : base.train) {
        const index_t row = c.doc_index(id);
        if (row < 0) throw DataError("unknown train doc_id '" + id + "'");
        by_class[c.labels[row]].push_back(row);
    }
    for (index_t k = 0; k < c.n_classes(); ++k) {
        if (by_class[k].empty()) {
            throw DataError("class '" + c.label_names[k] +
                            "' has no training documents to stratify");
        }
    }

    std::vector<SplitSet> out;
    for (int r = 0; r < repeats; ++r) {
        auto order = by_class;
        Rng rng(derive_seed(seed, "smalllabel/" + std::to_string(r)));
        for (auto& rows : order) rng.shuffle(rows);
        for (double f : fractions) {
            std::vector<index_t> rows;
            for (const auto& class_rows : order) {
                const index_t take = std::min<index_t>(
                    stratified_count(f / 100.0,
                                     static_cast<index_t>(class_rows.size())),
                    static_cast<index_t>(class_rows.size()));
                rows.insert(rows.end(), class_rows.begin(),
                            class_rows.begin() + take);
            }
            SplitSet s;
            s.train = ids_in_corpus_order(c, std::move(rows));
            s.val = base.val;
            s.test = base.test;
            s.label_fraction = f;
            s.repeat_index = r;
            out.push_back(std::move(s));
        }
    }
    return out;
}

SplitIndices resolve_split(const Corpus& c, const SplitSet& s) {
    auto resolve = [&](const std::vector<std::string>& ids,
                       const char* which) {
        std::vector<index_t> rows;
        rows.reserve(ids.size());
        for (const std::string& id : ids) {
            const index_t row = c.doc_index(id);
            if (row < 0) {
                throw DataError(std::string("unknown ") + which +
                                " doc_id '" + id + "'");
            }
            rows.push_back(row);
        }
        std::sort(rows.begin(), rows.end());
        if (std::adjacent_find(rows.begin(), rows.end()) != rows.end())
            throw DataError(std::string("duplicate doc_id in ") + which);
        return rows;
    };
    SplitIndices idx;
    idx.train = resolve(s.train, "train");
    idx.val = resolve(s.val, "val");
    idx.test = resolve(s.test, "test");

    std::vector<index_t> all = idx.train;
    all.insert(all.end(), idx.val.begin(), idx.val.end());
    all.insert(all.end(), idx.test.begin(), idx.test.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw DataError("train/val/test sets overlap");
    return idx;
}

Corpus subcorpus(const Corpus& c, const std::vector<index_t>& rows) {
    Corpus out;
    out.vocab = c.vocab;
    out.label_names = c.label_names;
    for (index_t r : rows) {
        if (r < 0 || r >= c.n_docs())
            throw DataError("subcorpus row out of range");
        out.doc_lookup.emplace(c.doc_ids[r], out.n_docs());
        out.docs.push_back(c.docs[r]);
        out.labels.push_back(c.labels[r]);
        out.doc_ids.push_back(c.doc_ids[r]);
    }
    return out;
}

void write_splits_json(std::ostream& out, const SplitSet& s) {
    nlohmann::json j;
    j["train"] = s.train;
    j["val"] = s.val;
    j["test"] = s.test;
    j["label_fraction"] = s.label_fraction;
    j["repeat_index"] = s.repeat_index;
    out << j.dump(2) << '\n';
}

void write_splits_json_file(const std::string& path, const SplitSet& s) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    write_splits_json(out, s);
    if (!out) throw DataError("write failed: " + path);
}

SplitSet read_splits_json(std::istream& in, const std::string& source) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(source + ": invalid splits JSON: " + e.what());
    }
    if (!j.is_object()) throw DataError(source + ": splits must be an object");
    SplitSet s;
    auto read_ids = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array()) {
            throw DataError(source + ": missing or non-array '" +
                            std::string(key) + "'");
        }
        std::vector<std::string> ids;
        for (const auto& v : j[key]) {
            if (!v.is_string())
                throw DataError(source + ": non-string doc_id in '" +
                                std::string(key) + "'");
            ids.push_back(v.get<std::string>());
        }
        return ids;
    };
    s.train = read_ids("train");
    s.val = read_ids("val");
    s.test = read_ids("test");
    if (j.contains("label_fraction"))
        s.label_fraction = j["label_fraction"].get<double>();
    if (j.contains("repeat_index"))
        s.repeat_index = j["repeat_index"].get<int>();
    return s;
}

SplitSet read_splits_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open splits: " + path);
    return read_splits_json(in, path);
}

} // namespace hetegcn
