#pragma once

#include <iosfwd>
#include <string>

#include "hetegcn/corpus.hpp"
#include "hetegcn/graphs.hpp"
#include "hetegcn/model.hpp"
#include "hetegcn/trainer.hpp"

namespace hetegcn {

/// Effective run configuration: the JSON document with every default
/// materialized. Sections: data, graphs, model, train, sweep, output.
/// Unknown keys are rejected; missing required keys (data.corpus,
/// data.splits, model.architecture, output.directory) are reported all
/// at once.
struct RunConfig {
    // data
    std::string corpus_path;
    std::string splits_path;
    std::string stopwords_path; // empty: no stopword list
    index_t min_count = 1;
    bool skip_filtering = false;
    // graphs
    index_t window = 20;
    index_t knn = 25;
    GraphMode mode = GraphMode::transductive;
    // model
    std::string architecture;
    index_t dim = 200;
    InputMode input_mode = InputMode::onehot;
    bool simplified = false;
    FuseCombine combine = FuseCombine::sum;
    // train; normalization may be set from either the model or the train
    // section, but not inconsistently from both
    TrainConfig train;
    // sweep grids; axes not listed in the config stay fixed at the train
    // section's value, unless sweep.paper_grid is set
    SweepGrid sweep;
    // output
    std::string output_dir;
};

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& source = "<config>");
RunConfig load_run_config_file(const std::string& path);

/// Canonical JSON of the effective config: defaults materialized, keys
/// sorted, round-trippable numbers. Identical configs produce identical
/// strings regardless of input formatting.
std::string canonical_config_json(const RunConfig& c);

/// FNV-1a 64 over the canonical JSON, 16 lowercase hex digits. Names the
/// per-run output subdirectory.
std::string config_hash(const RunConfig& c);

struct PreparedData {
    Corpus corpus; // preprocessed
    SplitSet split; // filtered of documents emptied by preprocessing
    GraphSet graphs;
    std::vector<std::string> dropped_doc_ids;
};

/// Load + preprocess the corpus, resolve splits, build the graphs the
/// architecture needs (all of them when arch is empty).
PreparedData prepare_data(const RunConfig& c);

/// Parsed command-line flags; which ones apply depends on the command.
struct CliOptions {
    std::string config_path;   // --config
    std::string out_override;  // --out
    std::string mode_override; // --mode {transductive|inductive}
    int seeds = 1;             // --seeds N
    bool inductive = false;    // --inductive
    index_t parallel = 1;      // --parallel N
    bool resume = false;       // --resume
    std::string split = "test"; // --split {train|val|test}
    std::string test_corpus;    // predict --inductive: fresh corpus TSV
};

void cmd_prepare(const CliOptions& o, std::ostream& out);
void cmd_train(const CliOptions& o, std::ostream& out);
void cmd_eval(const CliOptions& o, std::ostream& out);
void cmd_predict(const CliOptions& o, std::ostream& out);
void cmd_sweep(const CliOptions& o, std::ostream& out);

/// Dispatch a command by name and map exceptions to exit codes:
/// 0 success, 1 config, 2 data/shape/domain, 3 training failure.
int run_command(const std::string& name, const CliOptions& o,
                std::ostream& out, std::ostream& err);

} // namespace hetegcn
