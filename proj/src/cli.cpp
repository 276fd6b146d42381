#include "hetegcn/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_set>
#include <utility>

#include <fcntl.h>
#include <unistd.h>

#include <json.hpp>

#include "hetegcn/error.hpp"
#include "hetegcn/inference.hpp"
#include "hetegcn/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hetegcn {

namespace {

std::string fmt_real(real_t v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return s;
}

// Collects every problem (unknown keys, type mismatches, missing
// required keys) so a broken config is diagnosed in one pass.
struct ConfigReader {
    const json& root;
    std::vector<std::string> problems;

    const json* section(const char* name) {
        if (!root.contains(name)) return nullptr;
        const json& s = root.at(name);
        if (!s.is_object()) {
            problems.push_back(std::string(name) + ": expected an object");
            return nullptr;
        }
        return &s;
    }

    void check_keys(const json* s, const char* name,
                    std::initializer_list<const char*> allowed) {
        if (!s) return;
        for (const auto& item : s->items()) {
            bool known = false;
            for (const char* k : allowed)
                if (item.key() == k) known = true;
            if (!known)
                problems.push_back("unknown key " + std::string(name) + "." +
                                   item.key());
        }
    }

    bool has(const json* s, const char* key) const {
        return s != nullptr && s->contains(key);
    }

    bool get_string(const json* s, const char* sec, const char* key,
                    std::string& out) {
        if (!has(s, key)) return false;
        const json& v = s->at(key);
        if (!v.is_string()) {
            problems.push_back(std::string(sec) + "." + key +
                               ": expected a string");
            return false;
        }
        out = v.get<std::string>();
        return true;
    }

    bool get_bool(const json* s, const char* sec, const char* key, bool& out) {
        if (!has(s, key)) return false;
        const json& v = s->at(key);
        if (!v.is_boolean()) {
            problems.push_back(std::string(sec) + "." + key +
                               ": expected a boolean");
            return false;
        }
        out = v.get<bool>();
        return true;
    }

    bool get_real(const json* s, const char* sec, const char* key,
                  real_t& out) {
        if (!has(s, key)) return false;
        const json& v = s->at(key);
        if (!v.is_number()) {
            problems.push_back(std::string(sec) + "." + key +
                               ": expected a number");
            return false;
        }
        out = v.get<real_t>();
        return true;
    }

    bool get_index(const json* s, const char* sec, const char* key,
                   index_t& out) {
        if (!has(s, key)) return false;
        const json& v = s->at(key);
        if (!v.is_number_integer()) {
            problems.push_back(std::string(sec) + "." + key +
                               ": expected an integer");
            return false;
        }
        out = v.get<index_t>();
        return true;
    }

    bool get_seed(const json* s, const char* sec, const char* key,
                  std::uint64_t& out) {
        if (!has(s, key)) return false;
        const json& v = s->at(key);
        if (!v.is_number_integer() || (v.is_number_integer() &&
                                       !v.is_number_unsigned() &&
                                       v.get<std::int64_t>() < 0)) {
            problems.push_back(std::string(sec) + "." + key +
                               ": expected a non-negative integer");
            return false;
        }
        out = v.get<std::uint64_t>();
        return true;
    }

    bool get_reals(const json* s, const char* sec, const char* key,
                   std::vector<real_t>& out) {
        if (!has(s, key)) return false;
        const json& v = s->at(key);
        if (!v.is_array()) {
            problems.push_back(std::string(sec) + "." + key +
                               ": expected an array of numbers");
            return false;
        }
        std::vector<real_t> vals;
        for (const json& e : v) {
            if (!e.is_number()) {
                problems.push_back(std::string(sec) + "." + key +
                                   ": expected an array of numbers");
                return false;
            }
            vals.push_back(e.get<real_t>());
        }
        out = std::move(vals);
        return true;
    }

    bool get_strings(const json* s, const char* sec, const char* key,
                     std::vector<std::string>& out) {
        if (!has(s, key)) return false;
        const json& v = s->at(key);
        if (!v.is_array()) {
            problems.push_back(std::string(sec) + "." + key +
                               ": expected an array of strings");
            return false;
        }
        std::vector<std::string> vals;
        for (const json& e : v) {
            if (!e.is_string()) {
                problems.push_back(std::string(sec) + "." + key +
                                   ": expected an array of strings");
                return false;
            }
            vals.push_back(e.get<std::string>());
        }
        out = std::move(vals);
        return true;
    }

    template <typename Enum, typename FromString>
    bool get_enum(const json* s, const char* sec, const char* key,
                  FromString from_string, Enum& out) {
        std::string text;
        if (!get_string(s, sec, key, text)) return false;
        try {
            out = from_string(text);
            return true;
        } catch (const std::exception& e) {
            problems.push_back(std::string(sec) + "." + key + ": " + e.what());
            return false;
        }
    }
};

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

/// O_EXCL lock file guarding an output directory for the lifetime of a
/// writing command; removed on destruction.
class DirLock {
  public:
    explicit DirLock(const fs::path& dir) : lock_(dir / ".lock") {
        fs::create_directories(dir);
        const int fd =
            ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0) {
            if (errno == EEXIST)
                throw ConfigError(
                    "output directory " + dir.string() +
                    " is locked by another run (remove " + lock_.string() +
                    " if it is stale)");
            throw DataError("cannot create lock file: " + lock_.string());
        }
        ::close(fd);
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(lock_, ec);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

  private:
    fs::path lock_;
};

bool arch_uses(const ArchitectureSpec& a, GraphToken t) {
    for (const LayerSpec& l : a.layers)
        if (l.graph == t) return true;
    for (const LayerSpec& l : a.branch_layers)
        if (l.graph == t) return true;
    return false;
}

ArchitectureSpec make_arch(const RunConfig& c) {
    const ArchitectureSpec a = parse_architecture(
        c.architecture, c.input_mode, c.dim, c.simplified, c.combine);
    validate_architecture(a);
    return a;
}

/// Load the config file and fold the shared flag overrides into it, so
/// every command derives paths and hashes from the same effective config.
RunConfig effective_config(const CliOptions& o) {
    if (o.config_path.empty()) throw ConfigError("--config is required");
    RunConfig c = load_run_config_file(o.config_path);
    if (!o.mode_override.empty()) {
        try {
            c.mode = graph_mode_from_string(o.mode_override);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("--mode: ") + e.what());
        }
    }
    if (!o.out_override.empty()) c.output_dir = o.out_override;
    return c;
}

std::string checkpoint_dir(const fs::path& run_dir, std::uint64_t seed) {
    return (run_dir / ("seed-" + std::to_string(seed)) / "checkpoint")
        .string();
}

CheckpointMeta make_meta(const RunConfig& c, const GraphSet& g,
                         const TrainConfig& tc) {
    CheckpointMeta m;
    m.architecture = c.architecture;
    m.input_mode = c.input_mode;
    m.dims.n = g.n_docs();
    m.dims.m = g.n_words();
    m.dims.k = g.n_classes;
    m.hidden_dim = c.dim;
    m.simplified = c.simplified;
    m.combine = c.combine;
    m.normalization = tc.normalization;
    m.mode = c.mode;
    m.seed = tc.seed;
    return m;
}

const std::vector<index_t>& split_rows(const GraphSet& g,
                                       const std::string& name) {
    if (name == "train") return g.train_rows;
    if (name == "val") return g.val_rows;
    if (name == "test") return g.test_rows;
    throw ConfigError("--split must be one of train, val, test (got '" +
                      name + "')");
}

DenseMatrix eval_probs(const ArchitectureSpec& a, const ModelParams& p,
                       const GraphSet& g, Normalization norm) {
    const CompiledGraphs cg = compile_graphs(g, norm, a);
    const SparseMatrix* xf =
        a.input_mode == InputMode::X_features ? &g.X : nullptr;
    Rng rng(0);
    return forward(a, p, cg, xf, nullptr, 0.0, false, rng).probs();
}

real_t nan_value() { return std::numeric_limits<real_t>::quiet_NaN(); }

std::pair<real_t, real_t> split_metrics(const std::vector<index_t>& pred,
                                        const GraphSet& g,
                                        const std::vector<index_t>& rows) {
    if (rows.empty()) return {nan_value(), nan_value()};
    std::vector<index_t> p, gold;
    for (index_t r : rows) {
        p.push_back(pred[static_cast<std::size_t>(r)]);
        gold.push_back(g.labels[static_cast<std::size_t>(r)]);
    }
    return {micro_f1(p, gold), macro_f1(p, gold, g.n_classes)};
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    index_t epochs = 0;
    index_t best_epoch = -1;
    real_t best_val = 0.0;
    real_t train_micro = 0.0, train_macro = 0.0;
    real_t val_micro = 0.0, val_macro = 0.0;
    real_t test_micro = 0.0, test_macro = 0.0;
    bool diverged = false;
    std::string error;
};

void write_report_tsv(const fs::path& path,
                      const std::vector<SeedOutcome>& rows) {
    std::ostringstream out;
    out << "seed\tepochs\tbest_epoch\tbest_val_micro_f1\ttrain_micro_f1\t"
           "train_macro_f1\tval_micro_f1\tval_macro_f1\ttest_micro_f1\t"
           "test_macro_f1\tstatus\n";
    for (const SeedOutcome& r : rows) {
        out << r.seed << '\t' << r.epochs << '\t' << r.best_epoch << '\t'
            << fmt_real(r.best_val) << '\t' << fmt_real(r.train_micro) << '\t'
            << fmt_real(r.train_macro) << '\t' << fmt_real(r.val_micro)
            << '\t' << fmt_real(r.val_macro) << '\t'
            << fmt_real(r.test_micro) << '\t' << fmt_real(r.test_macro)
            << '\t' << (r.diverged ? "diverged: " + sanitize(r.error) : "ok")
            << '\n';
    }
    // Aggregate rows over the finite values per column (population
    // standard deviation, which is 0 for a single seed).
    auto agg = [&rows](auto field) {
        std::vector<real_t> vals;
        for (const SeedOutcome& r : rows) {
            const real_t v = field(r);
            if (std::isfinite(v)) vals.push_back(v);
        }
        if (vals.empty()) return std::pair<real_t, real_t>{nan_value(),
                                                           nan_value()};
        real_t mean = 0.0;
        for (real_t v : vals) mean += v;
        mean /= static_cast<real_t>(vals.size());
        real_t var = 0.0;
        for (real_t v : vals) var += (v - mean) * (v - mean);
        var /= static_cast<real_t>(vals.size());
        return std::pair<real_t, real_t>{mean, std::sqrt(var)};
    };
    const auto ep = agg([](const SeedOutcome& r) {
        return static_cast<real_t>(r.epochs);
    });
    const auto bv = agg([](const SeedOutcome& r) { return r.best_val; });
    const auto tr_mi = agg([](const SeedOutcome& r) { return r.train_micro; });
    const auto tr_ma = agg([](const SeedOutcome& r) { return r.train_macro; });
    const auto va_mi = agg([](const SeedOutcome& r) { return r.val_micro; });
    const auto va_ma = agg([](const SeedOutcome& r) { return r.val_macro; });
    const auto te_mi = agg([](const SeedOutcome& r) { return r.test_micro; });
    const auto te_ma = agg([](const SeedOutcome& r) { return r.test_macro; });
    out << "mean\t" << fmt_real(ep.first) << "\t\t" << fmt_real(bv.first)
        << '\t' << fmt_real(tr_mi.first) << '\t' << fmt_real(tr_ma.first)
        << '\t' << fmt_real(va_mi.first) << '\t' << fmt_real(va_ma.first)
        << '\t' << fmt_real(te_mi.first) << '\t' << fmt_real(te_ma.first)
        << "\t\n";
    out << "std\t" << fmt_real(ep.second) << "\t\t" << fmt_real(bv.second)
        << '\t' << fmt_real(tr_mi.second) << '\t' << fmt_real(tr_ma.second)
        << '\t' << fmt_real(va_mi.second) << '\t' << fmt_real(va_ma.second)
        << '\t' << fmt_real(te_mi.second) << '\t' << fmt_real(te_ma.second)
        << "\t\n";
    write_text_file(path, out.str());
}

void write_epochs_tsv(const fs::path& path, const TrainReport& report) {
    std::ostringstream out;
    out << "epoch\ttrain_loss\tval_micro_f1\n";
    for (std::size_t e = 0; e < report.epochs.size(); ++e)
        out << e << '\t' << fmt_real(report.epochs[e].train_loss) << '\t'
            << fmt_real(report.epochs[e].val_micro_f1) << '\n';
    write_text_file(path, out.str());
}

/// Export the stored word embeddings next to the checkpoint; doc-entity
/// architectures have none, which is reported rather than fatal.
void try_export_embeddings(const ArchitectureSpec& a, const ModelParams& p,
                           const GraphSet& g, Normalization norm,
                           const fs::path& dir, std::ostream& out) {
    try {
        const FeatureEmbeddings fe = export_feature_embeddings(a, p, g, norm);
        save_feature_embeddings(dir.string(), fe);
    } catch (const ConfigError& e) {
        out << "embeddings: not exportable (" << e.what() << ")\n";
    }
}

} // namespace

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& source) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(source + ": " + e.what());
    }
    if (!root.is_object())
        throw ConfigError(source + ": top level must be an object");

    ConfigReader r{root, {}};
    for (const auto& item : root.items()) {
        static const char* sections[] = {"data",  "graphs", "model",
                                         "train", "sweep",  "output"};
        bool known = false;
        for (const char* s : sections)
            if (item.key() == s) known = true;
        if (!known) r.problems.push_back("unknown section " + item.key());
    }

    const json* data = r.section("data");
    const json* graphs = r.section("graphs");
    const json* model = r.section("model");
    const json* train = r.section("train");
    const json* sweep = r.section("sweep");
    const json* output = r.section("output");

    r.check_keys(data, "data",
                 {"corpus", "splits", "stopwords", "min_count",
                  "skip_filtering"});
    r.check_keys(graphs, "graphs", {"window", "knn", "mode"});
    r.check_keys(model, "model",
                 {"architecture", "dim", "input_mode", "normalization",
                  "simplified", "combine"});
    r.check_keys(train, "train",
                 {"lr", "weight_decay", "emb_reg", "dropout", "normalization",
                  "max_epochs", "patience", "lr_decay_factor",
                  "lr_decay_every", "seed", "beta1", "beta2", "adam_eps"});
    r.check_keys(sweep, "sweep",
                 {"lrs", "weight_decays", "emb_regs", "dropouts",
                  "normalizations", "paper_grid"});
    r.check_keys(output, "output", {"directory"});

    RunConfig c;
    r.get_string(data, "data", "corpus", c.corpus_path);
    r.get_string(data, "data", "splits", c.splits_path);
    r.get_string(data, "data", "stopwords", c.stopwords_path);
    r.get_index(data, "data", "min_count", c.min_count);
    r.get_bool(data, "data", "skip_filtering", c.skip_filtering);

    r.get_index(graphs, "graphs", "window", c.window);
    r.get_index(graphs, "graphs", "knn", c.knn);
    r.get_enum(graphs, "graphs", "mode",
               [](const std::string& s) { return graph_mode_from_string(s); },
               c.mode);

    r.get_string(model, "model", "architecture", c.architecture);
    r.get_index(model, "model", "dim", c.dim);
    r.get_enum(model, "model", "input_mode",
               [](const std::string& s) { return input_mode_from_string(s); },
               c.input_mode);
    r.get_bool(model, "model", "simplified", c.simplified);
    r.get_enum(model, "model", "combine",
               [](const std::string& s) { return fuse_combine_from_string(s); },
               c.combine);

    Normalization model_norm = Normalization::sym;
    Normalization train_norm = Normalization::sym;
    const bool model_norm_set = r.get_enum(
        model, "model", "normalization",
        [](const std::string& s) { return normalization_from_string(s); },
        model_norm);
    const bool train_norm_set = r.get_enum(
        train, "train", "normalization",
        [](const std::string& s) { return normalization_from_string(s); },
        train_norm);
    if (model_norm_set && train_norm_set && model_norm != train_norm)
        r.problems.push_back(
            "normalization set to different values in the model and train "
            "sections");
    c.train.normalization = model_norm_set ? model_norm : train_norm;

    r.get_real(train, "train", "lr", c.train.lr);
    r.get_real(train, "train", "weight_decay", c.train.weight_decay);
    r.get_real(train, "train", "emb_reg", c.train.emb_reg);
    r.get_real(train, "train", "dropout", c.train.dropout);
    r.get_index(train, "train", "max_epochs", c.train.max_epochs);
    r.get_index(train, "train", "patience", c.train.patience);
    r.get_real(train, "train", "lr_decay_factor", c.train.lr_decay_factor);
    r.get_index(train, "train", "lr_decay_every", c.train.lr_decay_every);
    r.get_seed(train, "train", "seed", c.train.seed);
    r.get_real(train, "train", "beta1", c.train.beta1);
    r.get_real(train, "train", "beta2", c.train.beta2);
    r.get_real(train, "train", "adam_eps", c.train.adam_eps);

    bool paper_grid = false;
    r.get_bool(sweep, "sweep", "paper_grid", paper_grid);
    if (paper_grid) {
        c.sweep = SweepGrid::paper_default();
    } else {
        c.sweep.lrs = {c.train.lr};
        c.sweep.weight_decays = {c.train.weight_decay};
        c.sweep.emb_regs = {c.train.emb_reg};
        c.sweep.dropouts = {c.train.dropout};
        c.sweep.normalizations = {c.train.normalization};
    }
    r.get_reals(sweep, "sweep", "lrs", c.sweep.lrs);
    r.get_reals(sweep, "sweep", "weight_decays", c.sweep.weight_decays);
    r.get_reals(sweep, "sweep", "emb_regs", c.sweep.emb_regs);
    r.get_reals(sweep, "sweep", "dropouts", c.sweep.dropouts);
    std::vector<std::string> norm_names;
    if (r.get_strings(sweep, "sweep", "normalizations", norm_names)) {
        std::vector<Normalization> norms;
        for (const std::string& n : norm_names) {
            try {
                norms.push_back(normalization_from_string(n));
            } catch (const std::exception& e) {
                r.problems.push_back(std::string("sweep.normalizations: ") +
                                     e.what());
            }
        }
        if (norms.size() == norm_names.size())
            c.sweep.normalizations = std::move(norms);
    }

    r.get_string(output, "output", "directory", c.output_dir);

    std::vector<std::string> missing;
    if (c.corpus_path.empty()) missing.push_back("data.corpus");
    if (c.splits_path.empty()) missing.push_back("data.splits");
    if (c.architecture.empty()) missing.push_back("model.architecture");
    if (c.output_dir.empty()) missing.push_back("output.directory");
    for (const std::string& m : missing)
        r.problems.push_back("missing required key " + m);

    if (c.min_count < 0) r.problems.push_back("data.min_count must be >= 0");
    if (c.window < 1) r.problems.push_back("graphs.window must be >= 1");
    if (c.knn < 1) r.problems.push_back("graphs.knn must be >= 1");
    if (c.dim < 1) r.problems.push_back("model.dim must be >= 1");
    try {
        c.train.validate();
    } catch (const std::exception& e) {
        r.problems.push_back(std::string("train: ") + e.what());
    }

    if (!r.problems.empty()) {
        std::string msg = source + ":";
        for (const std::string& p : r.problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    return c;
}

RunConfig load_run_config_file(const std::string& path) {
    return parse_run_config(read_text_file(path), path);
}

std::string canonical_config_json(const RunConfig& c) {
    json j;
    j["data"] = {{"corpus", c.corpus_path},
                 {"splits", c.splits_path},
                 {"stopwords", c.stopwords_path},
                 {"min_count", c.min_count},
                 {"skip_filtering", c.skip_filtering}};
    j["graphs"] = {{"window", c.window},
                   {"knn", c.knn},
                   {"mode", to_string(c.mode)}};
    j["model"] = {{"architecture", c.architecture},
                  {"dim", c.dim},
                  {"input_mode", to_string(c.input_mode)},
                  {"normalization", to_string(c.train.normalization)},
                  {"simplified", c.simplified},
                  {"combine", to_string(c.combine)}};
    j["train"] = {{"lr", c.train.lr},
                  {"weight_decay", c.train.weight_decay},
                  {"emb_reg", c.train.emb_reg},
                  {"dropout", c.train.dropout},
                  {"max_epochs", c.train.max_epochs},
                  {"patience", c.train.patience},
                  {"lr_decay_factor", c.train.lr_decay_factor},
                  {"lr_decay_every", c.train.lr_decay_every},
                  {"seed", c.train.seed},
                  {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},
                  {"adam_eps", c.train.adam_eps}};
    std::vector<std::string> norm_names;
    for (Normalization n : c.sweep.normalizations)
        norm_names.push_back(to_string(n));
    j["sweep"] = {{"lrs", c.sweep.lrs},
                  {"weight_decays", c.sweep.weight_decays},
                  {"emb_regs", c.sweep.emb_regs},
                  {"dropouts", c.sweep.dropouts},
                  {"normalizations", norm_names}};
    j["output"] = {{"directory", c.output_dir}};
    return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& c) {
    const std::string text = canonical_config_json(c);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

PreparedData prepare_data(const RunConfig& c) {
    const Corpus raw = load_corpus_file(c.corpus_path);
    SplitSet split = read_splits_json_file(c.splits_path);
    std::unordered_set<std::string> stopwords;
    if (!c.stopwords_path.empty())
        stopwords = load_stopwords_file(c.stopwords_path);
    PreprocessResult pp =
        preprocess(raw, stopwords, c.min_count, c.skip_filtering);
    if (!pp.dropped_doc_ids.empty()) {
        const std::unordered_set<std::string> dropped(
            pp.dropped_doc_ids.begin(), pp.dropped_doc_ids.end());
        auto strip = [&dropped](std::vector<std::string>& ids) {
            std::erase_if(ids, [&dropped](const std::string& id) {
                return dropped.count(id) > 0;
            });
        };
        strip(split.train);
        strip(split.val);
        strip(split.test);
    }

    GraphBuildConfig gcfg;
    gcfg.window = c.window;
    gcfg.knn = c.knn;
    gcfg.mode = c.mode;
    gcfg.with_f = true;
    gcfg.with_n = true;
    if (!c.architecture.empty()) {
        const ArchitectureSpec a = make_arch(c);
        gcfg.with_f = arch_uses(a, GraphToken::F);
        gcfg.with_n = arch_uses(a, GraphToken::N);
    }

    PreparedData out;
    out.corpus = std::move(pp.corpus);
    out.split = std::move(split);
    out.dropped_doc_ids = std::move(pp.dropped_doc_ids);
    out.graphs = build_graphs(out.corpus, out.split, gcfg);
    return out;
}

void cmd_prepare(const CliOptions& o, std::ostream& out) {
    const RunConfig cfg = effective_config(o);
    RunConfig all = cfg;
    all.architecture.clear(); // build every graph, not just the model's
    const PreparedData d = prepare_data(all);

    const fs::path dir = fs::path(cfg.output_dir) / "prepared";
    DirLock lock(dir);
    write_vocab_tsv((dir / "vocab.tsv").string(), d.graphs.vocab);
    write_idf_tsv((dir / "idf.tsv").string(), d.graphs.vocab, d.graphs.idf);
    write_coo_file((dir / "X.coo").string(), d.graphs.X);
    write_coo_file((dir / "F.coo").string(), d.graphs.F);
    write_coo_file((dir / "N.coo").string(), *d.graphs.N);

    json m;
    m["command"] = "prepare";
    m["config"] = json::parse(canonical_config_json(cfg));
    m["window"] = cfg.window;
    m["knn"] = cfg.knn;
    m["mode"] = to_string(cfg.mode);
    m["min_count"] = cfg.min_count;
    m["skip_filtering"] = cfg.skip_filtering;
    m["stopwords"] = cfg.stopwords_path;
    m["idf_scope"] =
        cfg.mode == GraphMode::inductive ? "train" : "all_docs";
    m["n_docs"] = d.graphs.n_docs();
    m["n_words"] = d.graphs.n_words();
    m["n_classes"] = d.graphs.n_classes;
    m["label_names"] = d.corpus.label_names;
    m["doc_ids"] = d.graphs.doc_ids;
    m["n_dropped_docs"] = d.dropped_doc_ids.size();
    write_text_file(dir / "manifest.json", m.dump(2) + "\n");

    out << "prepared " << d.graphs.n_docs() << " docs, "
        << d.graphs.n_words() << " words, " << d.graphs.n_classes
        << " classes -> " << dir.string() << "\n";
}

void cmd_train(const CliOptions& o, std::ostream& out) {
    if (o.seeds < 1) throw ConfigError("--seeds must be >= 1");
    const RunConfig cfg = effective_config(o);
    const ArchitectureSpec arch = make_arch(cfg);
    const PreparedData d = prepare_data(cfg);

    const fs::path run_dir =
        fs::path(cfg.output_dir) / ("run-" + config_hash(cfg));
    DirLock lock(run_dir);
    write_text_file(run_dir / "config.json", canonical_config_json(cfg));

    std::vector<SeedOutcome> outcomes;
    for (int i = 0; i < o.seeds; ++i) {
        TrainConfig tc = cfg.train;
        tc.seed = cfg.train.seed + static_cast<std::uint64_t>(i);
        const TrainResult res = train(arch, d.graphs, tc);

        const fs::path seed_dir =
            run_dir / ("seed-" + std::to_string(tc.seed));
        fs::create_directories(seed_dir);
        save_checkpoint((seed_dir / "checkpoint").string(),
                        make_meta(cfg, d.graphs, tc), res.params);
        write_epochs_tsv(seed_dir / "epochs.tsv", res.report);
        try_export_embeddings(arch, res.params, d.graphs, tc.normalization,
                              seed_dir / "embeddings", out);

        SeedOutcome row;
        row.seed = tc.seed;
        row.epochs = res.report.epochs_run();
        row.best_epoch = res.report.best_epoch;
        row.best_val = res.report.best_val;
        row.diverged = res.report.diverged;
        row.error = res.report.divergence_message;
        const DenseMatrix probs =
            eval_probs(arch, res.params, d.graphs, tc.normalization);
        const std::vector<index_t> pred = argmax_rows(probs);
        std::tie(row.train_micro, row.train_macro) =
            split_metrics(pred, d.graphs, d.graphs.train_rows);
        std::tie(row.val_micro, row.val_macro) =
            split_metrics(pred, d.graphs, d.graphs.val_rows);
        std::tie(row.test_micro, row.test_macro) =
            split_metrics(pred, d.graphs, d.graphs.test_rows);
        outcomes.push_back(row);

        out << "seed " << tc.seed << ": epochs " << row.epochs
            << ", train_micro_f1 " << fmt_real(row.train_micro)
            << ", val_micro_f1 " << fmt_real(row.val_micro)
            << ", test_micro_f1 " << fmt_real(row.test_micro)
            << (row.diverged ? " [diverged]" : "") << "\n";
    }
    write_report_tsv(run_dir / "report.tsv", outcomes);
    out << "wrote " << (run_dir / "report.tsv").string() << "\n";

    const bool all_diverged =
        std::all_of(outcomes.begin(), outcomes.end(),
                    [](const SeedOutcome& r) { return r.diverged; });
    if (all_diverged)
        throw TrainError("all " + std::to_string(o.seeds) +
                         " runs diverged; last: " + outcomes.back().error);
}

void cmd_eval(const CliOptions& o, std::ostream& out) {
    const RunConfig cfg = effective_config(o);
    const fs::path run_dir =
        fs::path(cfg.output_dir) / ("run-" + config_hash(cfg));
    const std::string ckpt = checkpoint_dir(run_dir, cfg.train.seed);
    if (!fs::exists(fs::path(ckpt) / "manifest.json"))
        throw ConfigError("no checkpoint at " + ckpt +
                          "; run `hetegcn train` with this config first");
    const auto [meta, params] = load_checkpoint(ckpt);
    const PreparedData d = prepare_data(cfg);
    const ArchitectureSpec arch = meta.to_architecture();

    const std::vector<index_t>& rows = split_rows(d.graphs, o.split);
    if (rows.empty())
        throw DataError("split '" + o.split + "' is empty");
    const DenseMatrix probs =
        eval_probs(arch, params, d.graphs, meta.normalization);
    const auto [micro, macro] =
        split_metrics(argmax_rows(probs), d.graphs, rows);

    out << "split\t" << o.split << "\n";
    out << "docs\t" << rows.size() << "\n";
    out << "micro_f1\t" << fmt_real(micro) << "\n";
    out << "macro_f1\t" << fmt_real(macro) << "\n";
}

void cmd_predict(const CliOptions& o, std::ostream& out) {
    const RunConfig cfg = effective_config(o);
    const fs::path run_dir =
        fs::path(cfg.output_dir) / ("run-" + config_hash(cfg));
    const fs::path seed_dir =
        run_dir / ("seed-" + std::to_string(cfg.train.seed));
    const std::string ckpt = (seed_dir / "checkpoint").string();
    if (!fs::exists(fs::path(ckpt) / "manifest.json"))
        throw ConfigError("no checkpoint at " + ckpt +
                          "; run `hetegcn train` with this config first");
    const auto [meta, params] = load_checkpoint(ckpt);

    if (o.inductive) {
        if (o.test_corpus.empty())
            throw ConfigError(
                "--inductive requires the path of a fresh corpus TSV");
        const fs::path emb_dir = seed_dir / "embeddings";
        if (!fs::exists(emb_dir / "embeddings_meta.json"))
            throw ConfigError(
                "no stored feature embeddings at " + emb_dir.string() +
                ": inductive inference needs word embeddings feeding a "
                "final X layer, and architecture '" + meta.architecture +
                "' keeps no word-level layer to export");
        const FeatureEmbeddings fe = load_feature_embeddings(emb_dir.string());
        const Corpus fresh = load_corpus_file(o.test_corpus);
        const InductiveResult r =
            predict_inductive(fe, params.weights.back(), fresh);
        const std::vector<std::string> label_names =
            load_corpus_file(cfg.corpus_path).label_names;
        const fs::path out_path = o.out_override.empty()
                                      ? run_dir / "predictions-inductive.tsv"
                                      : fs::path(o.out_override);
        write_predictions_tsv(out_path.string(), r.predictions, label_names);
        out << "wrote " << out_path.string() << " (" << r.predictions.size()
            << " rows)\n";
        if (!r.all_oov_docs.empty()) {
            out << "all-oov docs (uniform prediction):";
            for (const std::string& id : r.all_oov_docs) out << " " << id;
            out << "\n";
        }
        return;
    }

    const PreparedData d = prepare_data(cfg);
    const ArchitectureSpec arch = meta.to_architecture();
    const std::vector<index_t>& rows = split_rows(d.graphs, o.split);
    if (rows.empty())
        throw DataError("split '" + o.split + "' is empty");
    std::vector<std::string> doc_ids;
    for (index_t r : rows)
        doc_ids.push_back(d.graphs.doc_ids[static_cast<std::size_t>(r)]);
    const std::vector<Prediction> preds = predict_transductive(
        arch, params, d.graphs, meta.normalization, doc_ids);
    const fs::path out_path =
        o.out_override.empty()
            ? run_dir / ("predictions-" + o.split + ".tsv")
            : fs::path(o.out_override);
    write_predictions_tsv(out_path.string(), preds, d.corpus.label_names);
    out << "wrote " << out_path.string() << " (" << preds.size()
        << " rows)\n";
}

void cmd_sweep(const CliOptions& o, std::ostream& out) {
    if (o.parallel < 1) throw ConfigError("--parallel must be >= 1");
    const RunConfig cfg = effective_config(o);
    const ArchitectureSpec arch = make_arch(cfg);
    const PreparedData d = prepare_data(cfg);
    const std::vector<TrainConfig> grid = cfg.sweep.enumerate(cfg.train);

    const fs::path sweep_dir =
        fs::path(cfg.output_dir) / ("sweep-" + config_hash(cfg));
    DirLock lock(sweep_dir);
    write_text_file(sweep_dir / "config.json", canonical_config_json(cfg));
    const fs::path tsv_path = sweep_dir / "sweep.tsv";

    SweepOptions sopts;
    sopts.parallel = o.parallel;
    std::vector<SweepRow> written;
    if (o.resume && fs::exists(tsv_path)) {
        sopts.resume.assign(grid.size(), std::nullopt);
        for (SweepRow& row : read_sweep_tsv(tsv_path.string())) {
            if (row.config_index >= 0 &&
                row.config_index < static_cast<index_t>(grid.size())) {
                written.push_back(row);
                sopts.resume[static_cast<std::size_t>(row.config_index)] =
                    std::move(row);
            }
        }
        out << "resuming: " << written.size() << "/" << grid.size()
            << " rows already done\n";
    }
    // Completed rows land on disk immediately so an interrupted sweep
    // can resume from the partial table.
    sopts.on_row = [&written, &tsv_path](const SweepRow& row) {
        written.push_back(row);
        write_sweep_tsv(tsv_path.string(), written);
    };

    const SweepResult res = sweep(arch, d.graphs, grid, sopts);
    write_sweep_tsv(tsv_path.string(), res.rows);
    out << "wrote " << tsv_path.string() << " (" << res.rows.size()
        << " rows)\n";
    if (res.best_index < 0)
        throw TrainError("every sweep configuration failed");

    const SweepRow& best = res.rows[static_cast<std::size_t>(res.best_index)];
    const TrainResult winner = train(arch, d.graphs, best.config);
    save_checkpoint((sweep_dir / "best" / "checkpoint").string(),
                    make_meta(cfg, d.graphs, best.config), winner.params);
    try_export_embeddings(arch, winner.params, d.graphs,
                          best.config.normalization,
                          sweep_dir / "best" / "embeddings", out);
    json bj;
    bj["config_index"] = best.config_index;
    bj["lr"] = best.config.lr;
    bj["weight_decay"] = best.config.weight_decay;
    bj["emb_reg"] = best.config.emb_reg;
    bj["dropout"] = best.config.dropout;
    bj["normalization"] = to_string(best.config.normalization);
    bj["val_micro_f1"] = best.val_micro_f1;
    bj["test_micro_f1"] = best.test_micro_f1;
    bj["test_macro_f1"] = best.test_macro_f1;
    write_text_file(sweep_dir / "best" / "best.json", bj.dump(2) + "\n");

    out << "best config_index " << best.config_index << ": lr "
        << fmt_real(best.config.lr) << ", weight_decay "
        << fmt_real(best.config.weight_decay) << ", emb_reg "
        << fmt_real(best.config.emb_reg) << ", dropout "
        << fmt_real(best.config.dropout) << ", normalization "
        << to_string(best.config.normalization) << ", val_micro_f1 "
        << fmt_real(best.val_micro_f1) << ", test_micro_f1 "
        << fmt_real(best.test_micro_f1) << "\n";
}

int run_command(const std::string& name, const CliOptions& o,
                std::ostream& out, std::ostream& err) {
    try {
        if (name == "prepare")
            cmd_prepare(o, out);
        else if (name == "train")
            cmd_train(o, out);
        else if (name == "eval")
            cmd_eval(o, out);
        else if (name == "predict")
            cmd_predict(o, out);
        else if (name == "sweep")
            cmd_sweep(o, out);
        else
            throw ConfigError("unknown command: " + name);
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const TrainError& e) {
        err << "training error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace hetegcn
