#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hetegcn/types.hpp"

namespace hetegcn {

/// Dense token <-> id mapping; ids assigned by first appearance.
struct Vocab {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, index_t> ids;

    index_t size() const { return static_cast<index_t>(tokens.size()); }
    index_t add(const std::string& token);
    /// -1 when absent.
    index_t lookup(const std::string& token) const;
};

struct Corpus {
    std::vector<std::vector<index_t>> docs;
    std::vector<index_t> labels;
    std::vector<std::string> doc_ids;
    Vocab vocab;
    std::vector<std::string> label_names;
    std::unordered_map<std::string, index_t> doc_lookup;

    index_t n_docs() const { return static_cast<index_t>(docs.size()); }
    index_t vocab_size() const { return vocab.size(); }
    index_t n_classes() const {
        return static_cast<index_t>(label_names.size());
    }
    /// -1 when absent.
    index_t doc_index(const std::string& id) const;
};

struct SplitSet {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
    double label_fraction = 100.0; // percent of available train docs labeled
    int repeat_index = 0;
};

/// Split doc ids resolved to corpus row indices, ascending.
struct SplitIndices {
    std::vector<index_t> train;
    std::vector<index_t> val;
    std::vector<index_t> test;
};

// Corpus TSV: one document per line, `doc_id<TAB>label<TAB>tok tok ...`.
Corpus load_corpus(std::istream& in, const std::string& source = "<stream>");
Corpus load_corpus_file(const std::string& path);

/// Stopword file: one token per line.
std::unordered_set<std::string> load_stopwords_file(const std::string& path);

/// Total corpus frequency per token id.
std::vector<index_t> token_frequencies(const Corpus& c);

struct PreprocessResult {
    Corpus corpus;
    std::vector<std::string> dropped_doc_ids; // emptied by filtering
};

/// Remove stopwords and tokens with corpus frequency < min_count, then
/// re-densify the vocabulary and drop documents that became empty. With
/// skip_filtering the corpus passes through unchanged (the short-text case).
PreprocessResult preprocess(const Corpus& c,
                            const std::unordered_set<std::string>& stopwords,
                            index_t min_count, bool skip_filtering);

/// Uniformly sample val_fraction of the non-test docs into val, rest into
/// train. stratified_val switches to per-class proportional sampling.
SplitSet split_standard(const Corpus& c,
                        const std::vector<std::string>& test_ids,
                        double val_fraction, std::uint64_t seed,
                        bool stratified_val = false);

/// Nested stratified label-budget splits: for each repeat, per-class
/// shuffled orders are fixed once and every fraction takes a prefix, so a
/// smaller budget is always a subset of a larger one. Per-class count is
/// max(1, round(fraction/100 * class size)).
std::vector<SplitSet> split_small_label(const SplitSet& base, const Corpus& c,
                                        const std::vector<double>& fractions,
                                        int repeats, std::uint64_t seed);

/// Map doc ids to row indices; unknown id is an error.
SplitIndices resolve_split(const Corpus& c, const SplitSet& s);

/// Copy of the selected rows (corpus order preserved); vocabulary, label
/// ids and names are shared unchanged.
Corpus subcorpus(const Corpus& c, const std::vector<index_t>& rows);

// Splits JSON: {"train": [...], "val": [...], "test": [...]} of doc_id
// strings plus optional "label_fraction" and "repeat_index".
void write_splits_json(std::ostream& out, const SplitSet& s);
void write_splits_json_file(const std::string& path, const SplitSet& s);
SplitSet read_splits_json(std::istream& in,
                          const std::string& source = "<stream>");
SplitSet read_splits_json_file(const std::string& path);

} // namespace hetegcn
