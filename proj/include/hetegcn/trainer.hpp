#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hetegcn/graphs.hpp"
#include "hetegcn/model.hpp"
#include "hetegcn/types.hpp"

namespace hetegcn {

struct TrainConfig {
    real_t lr = 0.01;
    real_t weight_decay = 0.0; // L2 on every weight except the first layer's
    real_t emb_reg = 0.0;      // L2 on the first-layer (embedding) weights
    real_t dropout = 0.0;
    Normalization normalization = Normalization::sym;
    index_t max_epochs = 300;
    index_t patience = 30;
    real_t lr_decay_factor = 0.99;
    index_t lr_decay_every = 50;
    std::uint64_t seed = 0;
    real_t beta1 = 0.9;
    real_t beta2 = 0.999;
    real_t adam_eps = 1e-8;

    void validate() const; // ConfigError on violation
};

/// lr for epoch e: lr * factor^floor(e / every).
real_t lr_at_epoch(const TrainConfig& cfg, index_t epoch);

struct AdamState {
    std::vector<DenseMatrix> m;
    std::vector<DenseMatrix> v;
    index_t t = 0;

    static AdamState like(const ModelParams& p);
};

/// One Adam update over all weights with bias-corrected moments.
void adam_step(ModelParams& params, AdamState& state,
               const std::vector<DenseMatrix>& grads, real_t lr,
               const TrainConfig& cfg);

struct LossResult {
    real_t loss = 0.0;
    std::vector<DenseMatrix> grads;
};

/// Mean cross-entropy over the labeled rows plus
/// (weight_decay/2)*sum ||W_l||^2 over non-first weights and
/// (emb_reg/2)*sum ||W_0||^2 over first-layer weights, with gradients for
/// every weight. Dropout masks are drawn from rng and replayed in the
/// backward pass. Throws TrainError (carrying `epoch`) on non-finite
/// activations or loss.
LossResult loss_and_gradients(const ArchitectureSpec& a,
                              const ModelParams& params,
                              const CompiledGraphs& g,
                              const SparseMatrix* x_features,
                              const std::vector<index_t>& labels,
                              const std::vector<index_t>& labeled_rows,
                              const TrainConfig& cfg, Rng& rng,
                              index_t epoch = -1);

/// Loss only (no gradients, no dropout); shared by tests and sweeps.
real_t loss_value(const ArchitectureSpec& a, const ModelParams& params,
                  const CompiledGraphs& g, const SparseMatrix* x_features,
                  const std::vector<index_t>& labels,
                  const std::vector<index_t>& labeled_rows,
                  const TrainConfig& cfg);

/// Stops when `patience` consecutive epochs fail to strictly improve the
/// best validation score.
class EarlyStopper {
  public:
    explicit EarlyStopper(index_t patience);

    /// Record this epoch's score; true means stop after this epoch.
    bool update(real_t score, index_t epoch);

    index_t best_epoch() const { return best_epoch_; }
    real_t best_score() const { return best_score_; }
    bool has_best() const { return best_epoch_ >= 0; }

  private:
    index_t patience_;
    index_t best_epoch_ = -1;
    real_t best_score_ = 0.0;
};

struct EpochStats {
    real_t train_loss = 0.0;
    real_t val_micro_f1 = 0.0; // NaN when the validation set is empty
    real_t seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    index_t best_epoch = -1;
    real_t best_val = 0.0; // NaN when the validation set is empty
    bool diverged = false;
    std::string divergence_message;

    index_t epochs_run() const { return static_cast<index_t>(epochs.size()); }
};

struct TrainResult {
    ModelParams params; // best-epoch weights (last epoch without validation)
    TrainReport report;
};

/// Full-batch Adam with per-epoch dropout streams seeded by
/// derive_seed(seed, "dropout/<epoch>"); early stopping on validation
/// micro-F1 with best-weight restoration. An empty validation set runs to
/// max_epochs and keeps the final weights. Divergence sets report.diverged
/// and returns the best weights so far.
TrainResult train(const ArchitectureSpec& a, const GraphSet& g,
                  const TrainConfig& cfg);

struct SweepGrid {
    std::vector<real_t> lrs;
    std::vector<real_t> weight_decays;
    std::vector<real_t> emb_regs;
    std::vector<real_t> dropouts;
    std::vector<Normalization> normalizations;

    /// Paper lattice: lr {1e-2,1e-3,1e-4}; weight decay and embedding
    /// regularizer {0} plus powers of ten from 1e-4 to 1e2; dropout
    /// {0,0.25,0.5,0.75}; all three normalizations.
    static SweepGrid paper_default();

    /// Nested enumeration, normalization innermost:
    /// lr > weight_decay > emb_reg > dropout > normalization.
    std::vector<TrainConfig> enumerate(const TrainConfig& base) const;
};

struct SweepRow {
    index_t config_index = -1;
    TrainConfig config;
    real_t val_micro_f1 = 0.0;
    real_t test_micro_f1 = 0.0;
    real_t test_macro_f1 = 0.0;
    index_t epochs = 0;
    real_t sec_per_epoch = 0.0;
    bool failed = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows; // one per grid entry, grid order
    index_t best_index = -1;    // -1 when every run failed
};

struct SweepOptions {
    index_t parallel = 1;
    // Rows already computed (resume); nullopt entries are trained.
    std::vector<std::optional<SweepRow>> resume;
    // Called once per freshly trained row, serialized across workers.
    std::function<void(const SweepRow&)> on_row;
};

/// Train every grid entry and pick the best validation micro-F1; ties go
/// to the earlier grid index. Failed runs are recorded and skipped for
/// selection. Deterministic for any worker count.
SweepResult sweep(const ArchitectureSpec& a, const GraphSet& g,
                  const std::vector<TrainConfig>& grid,
                  const SweepOptions& opts = {});

void write_sweep_tsv(const std::string& path,
                     const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_tsv(const std::string& path);

} // namespace hetegcn
