#include "hetegcn/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "hetegcn/error.hpp"
#include "hetegcn/kernels.hpp"
#include "hetegcn/metrics.hpp"

namespace hetegcn {

void TrainConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr))
        throw ConfigError("lr must be positive and finite");
    if (weight_decay < 0.0 || emb_reg < 0.0)
        throw ConfigError("regularization coefficients must be non-negative");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw ConfigError("dropout must lie in [0, 1)");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0))
        throw ConfigError("lr_decay_factor must lie in (0, 1]");
    if (lr_decay_every < 1) throw ConfigError("lr_decay_every must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
}

real_t lr_at_epoch(const TrainConfig& cfg, index_t epoch) {
    if (epoch < 0) throw ConfigError("epoch must be non-negative");
    const index_t steps = epoch / cfg.lr_decay_every;
    return cfg.lr * std::pow(cfg.lr_decay_factor, static_cast<real_t>(steps));
}

AdamState AdamState::like(const ModelParams& p) {
    AdamState s;
    s.m.reserve(p.weights.size());
    s.v.reserve(p.weights.size());
    for (const DenseMatrix& w : p.weights) {
        s.m.emplace_back(w.n_rows(), w.n_cols());
        s.v.emplace_back(w.n_rows(), w.n_cols());
    }
    return s;
}

void adam_step(ModelParams& params, AdamState& state,
               const std::vector<DenseMatrix>& grads, real_t lr,
               const TrainConfig& cfg) {
    if (grads.size() != params.weights.size() ||
        state.m.size() != params.weights.size())
        throw ShapeError("adam_step: weight/gradient/state count mismatch");
    state.t += 1;
    const real_t bc1 = 1.0 - std::pow(cfg.beta1, static_cast<real_t>(state.t));
    const real_t bc2 = 1.0 - std::pow(cfg.beta2, static_cast<real_t>(state.t));
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        DenseMatrix& w = params.weights[i];
        if (!w.same_shape(grads[i]))
            throw ShapeError("adam_step: gradient shape mismatch at weight " +
                             std::to_string(i));
        kernels::adam_update(w.data(), state.m[i].data(), state.v[i].data(),
                             grads[i].data(),
                             static_cast<std::size_t>(w.size()), cfg.beta1,
                             cfg.beta2, cfg.adam_eps, lr, bc1, bc2);
    }
}

namespace {

// C += coeff * W, the gradient of (coeff/2) * ||W||^2.
void add_scaled(DenseMatrix& c, real_t coeff, const DenseMatrix& w) {
    if (coeff == 0.0) return;
    kernels::axpy(c.data(), coeff, w.data(),
                  static_cast<std::size_t>(c.size()));
}

// A^T * B without materializing the transpose; accumulation into each
// output row runs in increasing source-row order, matching
// spmm(transpose(a), b). Tolerates explicit zeros (dropped inputs).
DenseMatrix spmm_tn(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.n_rows() != b.n_rows())
        throw ShapeError("spmm_tn: inner dimensions disagree");
    DenseMatrix out(a.n_cols(), b.n_cols());
    const auto cols = static_cast<std::size_t>(b.n_cols());
    for (index_t i = 0; i < a.n_rows(); ++i) {
        for (index_t p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) {
            kernels::axpy(out.row(a.col_indices()[p]), a.values()[p],
                          b.row(i), cols);
        }
    }
    return out;
}

// Undo the one-hot row dropout: kept rows scale by 1/(1-p), dropped rows
// contribute nothing.
void replay_row_mask(DenseMatrix& dw, const std::vector<std::uint8_t>& mask,
                     real_t scale) {
    if (mask.empty()) return;
    for (index_t r = 0; r < dw.n_rows(); ++r) {
        real_t* row = dw.row(r);
        const auto cols = static_cast<std::size_t>(dw.n_cols());
        if (mask[static_cast<std::size_t>(r)]) {
            kernels::scal(row, scale, cols);
        } else {
            std::fill(row, row + cols, 0.0);
        }
    }
}

struct LossParts {
    real_t loss = 0.0;
    DenseMatrix dz_last; // gradient of the mean CE wrt final logits
};

LossParts cross_entropy(const DenseMatrix& probs,
                        const std::vector<index_t>& labels,
                        const std::vector<index_t>& labeled_rows,
                        bool want_grad) {
    if (labeled_rows.empty())
        throw DataError("loss requires at least one labeled row");
    const index_t n = probs.n_rows();
    const index_t k = probs.n_cols();
    if (static_cast<index_t>(labels.size()) != n)
        throw ShapeError("labels length must equal the number of rows");

    LossParts out;
    if (want_grad) out.dz_last = DenseMatrix(n, k);
    const real_t inv = 1.0 / static_cast<real_t>(labeled_rows.size());
    real_t ce = 0.0;
    for (index_t row : labeled_rows) {
        if (row < 0 || row >= n)
            throw DataError("labeled row " + std::to_string(row) +
                            " outside the graph");
        const index_t y = labels[static_cast<std::size_t>(row)];
        if (y < 0 || y >= k)
            throw DataError("label outside [0, k) at row " +
                            std::to_string(row));
        const real_t* pr = probs.row(row);
        ce -= std::log(pr[y]);
        if (want_grad) {
            real_t* dr = out.dz_last.row(row);
            for (index_t j = 0; j < k; ++j) dr[j] = pr[j] * inv;
            dr[y] -= inv;
        }
    }
    out.loss = ce * inv;
    return out;
}

real_t regularization(const ArchitectureSpec& a, const ModelParams& params,
                      const TrainConfig& cfg) {
    const std::size_t n_first = a.fuse ? a.branch_layers.size() : 1;
    real_t reg = 0.0;
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        const real_t coeff = i < n_first ? cfg.emb_reg : cfg.weight_decay;
        if (coeff == 0.0) continue;
        reg += 0.5 * coeff *
               kernels::sum_squares(
                   params.weights[i].data(),
                   static_cast<std::size_t>(params.weights[i].size()));
    }
    return reg;
}

void check_finite(const ForwardTrace& trace, index_t epoch) {
    for (std::size_t b = 0; b < trace.branches.size(); ++b) {
        if (!trace.branches[b].z.all_finite())
            throw TrainError("non-finite activations in branch " +
                                 std::to_string(b),
                             static_cast<int>(epoch));
    }
    for (std::size_t l = 0; l < trace.layers.size(); ++l) {
        if (!trace.layers[l].z.all_finite())
            throw TrainError("non-finite activations in layer " +
                                 std::to_string(l),
                             static_cast<int>(epoch));
    }
}

} // namespace

LossResult loss_and_gradients(const ArchitectureSpec& a,
                              const ModelParams& params,
                              const CompiledGraphs& g,
                              const SparseMatrix* x_features,
                              const std::vector<index_t>& labels,
                              const std::vector<index_t>& labeled_rows,
                              const TrainConfig& cfg, Rng& rng,
                              index_t epoch) {
    ForwardTrace trace = forward(a, params, g, x_features, nullptr,
                                 cfg.dropout, true, rng);
    check_finite(trace, epoch);

    LossParts ce =
        cross_entropy(trace.probs(), labels, labeled_rows, true);
    LossResult res;
    res.loss = ce.loss + regularization(a, params, cfg);
    if (!std::isfinite(res.loss))
        throw TrainError("non-finite loss", static_cast<int>(epoch));

    const std::size_t n_first = a.fuse ? a.branch_layers.size() : 1;
    res.grads.reserve(params.weights.size());
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        res.grads.emplace_back(params.weights[i].n_rows(),
                               params.weights[i].n_cols());
        add_scaled(res.grads[i], i < n_first ? cfg.emb_reg : cfg.weight_decay,
                   params.weights[i]);
    }

    // Walk the chain top-down. d_out holds the gradient wrt the current
    // layer's post-activation output (for the softmax layer the combined
    // softmax+CE gradient wrt logits is used directly).
    DenseMatrix d_out = std::move(ce.dz_last);
    const std::size_t n_layers = trace.layers.size();
    for (std::size_t li = n_layers; li-- > 0;) {
        const LayerTrace& t = trace.layers[li];
        const LayerSpec& spec = a.layers[li];
        const std::size_t w_idx = a.branch_layers.size() + li;
        DenseMatrix dz = std::move(d_out);
        if (li + 1 != n_layers && spec.activation == Activation::relu) {
            kernels::relu_backward(dz.data(), t.z.data(),
                                   static_cast<std::size_t>(dz.size()));
        }
        switch (t.kind) {
            case InputKind::dense: {
                DenseMatrix dw = gemm_tn(t.b, dz);
                kernels::axpy(res.grads[w_idx].data(), 1.0, dw.data(),
                              static_cast<std::size_t>(dw.size()));
                if (li > 0 || a.fuse) {
                    DenseMatrix db =
                        gemm_nn(dz, transpose(params.weights[w_idx]));
                    DenseMatrix dd = spmm(g.op_t(spec.graph), db);
                    if (!t.mask.empty())
                        kernels::apply_mask(
                            dd.data(), t.mask.data(), t.scale,
                            static_cast<std::size_t>(dd.size()));
                    d_out = std::move(dd);
                }
                break;
            }
            case InputKind::onehot: {
                DenseMatrix dw = spmm(g.op_t(spec.graph), dz);
                replay_row_mask(dw, t.mask, t.scale);
                kernels::axpy(res.grads[w_idx].data(), 1.0, dw.data(),
                              static_cast<std::size_t>(dw.size()));
                break;
            }
            case InputKind::sparse_features: {
                DenseMatrix ds = spmm(g.op_t(spec.graph), dz);
                DenseMatrix dw = spmm_tn(t.x_drop, ds);
                kernels::axpy(res.grads[w_idx].data(), 1.0, dw.data(),
                              static_cast<std::size_t>(dw.size()));
                break;
            }
        }
    }

    if (a.fuse) {
        // d_out now carries the gradient wrt the fused matrix.
        const index_t d = trace.branches.front().e_out.n_cols();
        for (std::size_t b = 0; b < trace.branches.size(); ++b) {
            const LayerTrace& bt = trace.branches[b];
            const LayerSpec& bs = a.branch_layers[b];
            DenseMatrix de;
            if (a.fuse->combine == FuseCombine::sum) {
                de = d_out;
            } else {
                de = DenseMatrix(d_out.n_rows(), d);
                for (index_t i = 0; i < d_out.n_rows(); ++i) {
                    const real_t* src =
                        d_out.row(i) + static_cast<index_t>(b) * d;
                    std::copy(src, src + d, de.row(i));
                }
            }
            if (bs.activation == Activation::relu) {
                kernels::relu_backward(de.data(), bt.z.data(),
                                       static_cast<std::size_t>(de.size()));
            }
            DenseMatrix dw = spmm(g.op_t(bs.graph), de);
            replay_row_mask(dw, bt.mask, bt.scale);
            kernels::axpy(res.grads[b].data(), 1.0, dw.data(),
                          static_cast<std::size_t>(dw.size()));
        }
    }
    return res;
}

real_t loss_value(const ArchitectureSpec& a, const ModelParams& params,
                  const CompiledGraphs& g, const SparseMatrix* x_features,
                  const std::vector<index_t>& labels,
                  const std::vector<index_t>& labeled_rows,
                  const TrainConfig& cfg) {
    Rng rng(0);
    ForwardTrace trace =
        forward(a, params, g, x_features, nullptr, 0.0, false, rng);
    LossParts ce = cross_entropy(trace.probs(), labels, labeled_rows, false);
    return ce.loss + regularization(a, params, cfg);
}

EarlyStopper::EarlyStopper(index_t patience) : patience_(patience) {
    if (patience < 1) throw ConfigError("patience must be >= 1");
}

bool EarlyStopper::update(real_t score, index_t epoch) {
    if (best_epoch_ < 0 || score > best_score_) {
        best_score_ = score;
        best_epoch_ = epoch;
        return false;
    }
    return epoch - best_epoch_ >= patience_;
}

namespace {

std::vector<index_t> predictions_at(const ArchitectureSpec& a,
                                    const ModelParams& p,
                                    const CompiledGraphs& g,
                                    const SparseMatrix* xf,
                                    const std::vector<index_t>& rows) {
    Rng rng(0);
    ForwardTrace trace = forward(a, p, g, xf, nullptr, 0.0, false, rng);
    const std::vector<index_t> all = argmax_rows(trace.probs());
    std::vector<index_t> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = all[static_cast<std::size_t>(rows[i])];
    return out;
}

std::vector<index_t> labels_at(const std::vector<index_t>& labels,
                               const std::vector<index_t>& rows) {
    std::vector<index_t> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = labels[static_cast<std::size_t>(rows[i])];
    return out;
}

} // namespace

TrainResult train(const ArchitectureSpec& a, const GraphSet& g,
                  const TrainConfig& cfg) {
    cfg.validate();
    validate_architecture(a);
    if (a.input_mode == InputMode::external)
        throw ConfigError("train does not accept external input features");
    if (g.train_rows.empty())
        throw DataError("training requires labeled rows");

    const CompiledGraphs cg = compile_graphs(g, cfg.normalization, a);
    const SparseMatrix* xf =
        a.input_mode == InputMode::X_features ? &g.X : nullptr;
    Dims dims;
    dims.n = g.n_docs();
    dims.m = g.n_words();
    dims.k = g.n_classes;

    TrainResult out;
    out.params = init_params(a, dims, cfg.seed);
    AdamState state = AdamState::like(out.params);
    EarlyStopper stopper(cfg.patience);
    const bool has_val = !g.val_rows.empty();
    const std::vector<index_t> val_truth = labels_at(g.labels, g.val_rows);
    ModelParams best = out.params;

    for (index_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        Rng drop_rng(
            derive_seed(cfg.seed, "dropout/" + std::to_string(epoch)));
        LossResult lg;
        try {
            lg = loss_and_gradients(a, out.params, cg, xf, g.labels,
                                    g.train_rows, cfg, drop_rng, epoch);
        } catch (const TrainError& e) {
            out.report.diverged = true;
            out.report.divergence_message =
                "epoch " + std::to_string(epoch) + ": " + e.what();
            break;
        }
        adam_step(out.params, state, lg.grads, lr_at_epoch(cfg, epoch), cfg);

        EpochStats stats;
        stats.train_loss = lg.loss;
        bool stop = false;
        if (has_val) {
            const real_t score =
                micro_f1(predictions_at(a, out.params, cg, xf, g.val_rows),
                         val_truth);
            stats.val_micro_f1 = score;
            const bool stop_now = stopper.update(score, epoch);
            if (stopper.best_epoch() == epoch) best = out.params;
            stop = stop_now;
        } else {
            stats.val_micro_f1 = std::numeric_limits<real_t>::quiet_NaN();
        }
        stats.seconds =
            std::chrono::duration<real_t>(std::chrono::steady_clock::now() -
                                          started)
                .count();
        out.report.epochs.push_back(stats);
        if (stop) break;
    }

    if (has_val && stopper.has_best()) {
        out.params = std::move(best);
        out.report.best_epoch = stopper.best_epoch();
        out.report.best_val = stopper.best_score();
    } else {
        out.report.best_epoch = out.report.epochs_run() - 1;
        out.report.best_val = std::numeric_limits<real_t>::quiet_NaN();
    }
    return out;
}

SweepGrid SweepGrid::paper_default() {
    SweepGrid g;
    g.lrs = {1e-2, 1e-3, 1e-4};
    g.weight_decays = {0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
    g.emb_regs = g.weight_decays;
    g.dropouts = {0.0, 0.25, 0.5, 0.75};
    g.normalizations = {Normalization::raw, Normalization::row,
                        Normalization::sym};
    return g;
}

std::vector<TrainConfig> SweepGrid::enumerate(const TrainConfig& base) const {
    if (lrs.empty() || weight_decays.empty() || emb_regs.empty() ||
        dropouts.empty() || normalizations.empty())
        throw ConfigError("sweep grid has an empty axis");
    std::vector<TrainConfig> out;
    out.reserve(lrs.size() * weight_decays.size() * emb_regs.size() *
                dropouts.size() * normalizations.size());
    for (real_t lr : lrs)
        for (real_t wd : weight_decays)
            for (real_t er : emb_regs)
                for (real_t dp : dropouts)
                    for (Normalization nm : normalizations) {
                        TrainConfig c = base;
                        c.lr = lr;
                        c.weight_decay = wd;
                        c.emb_reg = er;
                        c.dropout = dp;
                        c.normalization = nm;
                        out.push_back(c);
                    }
    return out;
}

namespace {

SweepRow run_sweep_entry(const ArchitectureSpec& a, const GraphSet& g,
                         const TrainConfig& cfg, index_t idx) {
    SweepRow row;
    row.config_index = idx;
    row.config = cfg;
    row.val_micro_f1 = std::numeric_limits<real_t>::quiet_NaN();
    row.test_micro_f1 = std::numeric_limits<real_t>::quiet_NaN();
    row.test_macro_f1 = std::numeric_limits<real_t>::quiet_NaN();
    try {
        TrainResult r = train(a, g, cfg);
        row.epochs = r.report.epochs_run();
        real_t total = 0.0;
        for (const EpochStats& s : r.report.epochs) total += s.seconds;
        row.sec_per_epoch =
            row.epochs > 0 ? total / static_cast<real_t>(row.epochs) : 0.0;
        row.val_micro_f1 = r.report.best_val;
        if (r.report.diverged) {
            row.failed = true;
            row.error = r.report.divergence_message;
            return row;
        }
        if (!g.test_rows.empty()) {
            const CompiledGraphs cg = compile_graphs(g, cfg.normalization, a);
            const SparseMatrix* xf =
                a.input_mode == InputMode::X_features ? &g.X : nullptr;
            const std::vector<index_t> pred =
                predictions_at(a, r.params, cg, xf, g.test_rows);
            const std::vector<index_t> truth = labels_at(g.labels, g.test_rows);
            row.test_micro_f1 = micro_f1(pred, truth);
            row.test_macro_f1 = macro_f1(pred, truth, g.n_classes);
        }
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    return row;
}

real_t selection_score(const SweepRow& row) {
    if (row.failed || std::isnan(row.val_micro_f1))
        return -std::numeric_limits<real_t>::infinity();
    return row.val_micro_f1;
}

} // namespace

SweepResult sweep(const ArchitectureSpec& a, const GraphSet& g,
                  const std::vector<TrainConfig>& grid,
                  const SweepOptions& opts) {
    if (grid.empty()) throw ConfigError("sweep grid is empty");
    if (!opts.resume.empty() && opts.resume.size() != grid.size())
        throw ConfigError("resume row count does not match the grid");

    SweepResult res;
    res.rows.resize(grid.size());
    std::vector<char> done(grid.size(), 0);
    for (std::size_t i = 0; i < opts.resume.size(); ++i) {
        if (opts.resume[i]) {
            res.rows[i] = *opts.resume[i];
            res.rows[i].config_index = static_cast<index_t>(i);
            done[i] = 1;
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex row_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            if (done[i]) continue;
            SweepRow row =
                run_sweep_entry(a, g, grid[i], static_cast<index_t>(i));
            {
                std::lock_guard<std::mutex> lock(row_mutex);
                res.rows[i] = std::move(row);
                if (opts.on_row) opts.on_row(res.rows[i]);
            }
        }
    };

    const index_t parallel = std::max<index_t>(1, opts.parallel);
    if (parallel == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const auto n_threads = static_cast<std::size_t>(
            std::min<index_t>(parallel, static_cast<index_t>(grid.size())));
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    real_t best = -std::numeric_limits<real_t>::infinity();
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const real_t score = selection_score(res.rows[i]);
        if (score > best) {
            best = score;
            res.best_index = static_cast<index_t>(i);
        }
    }
    if (res.best_index < 0) {
        // Every score sits at -inf; fall back to the first completed run.
        for (std::size_t i = 0; i < res.rows.size(); ++i) {
            if (!res.rows[i].failed) {
                res.best_index = static_cast<index_t>(i);
                break;
            }
        }
    }
    return res;
}

namespace {

constexpr const char* kSweepHeader =
    "config_index\tlr\tweight_decay\temb_reg\tdropout\tnormalization\t"
    "val_micro_f1\ttest_micro_f1\ttest_macro_f1\tepochs\tsec_per_epoch\t"
    "status";

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

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

real_t parse_real(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const real_t v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("sweep TSV: bad " + what + " value '" + s + "'");
    }
}

index_t parse_index(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return static_cast<index_t>(v);
    } catch (const std::exception&) {
        throw DataError("sweep TSV: bad " + what + " value '" + s + "'");
    }
}

} // namespace

void write_sweep_tsv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << kSweepHeader << '\n';
    for (const SweepRow& r : rows) {
        out << r.config_index << '\t' << fmt_real(r.config.lr) << '\t'
            << fmt_real(r.config.weight_decay) << '\t'
            << fmt_real(r.config.emb_reg) << '\t' << fmt_real(r.config.dropout)
            << '\t' << to_string(r.config.normalization) << '\t'
            << fmt_real(r.val_micro_f1) << '\t' << fmt_real(r.test_micro_f1)
            << '\t' << fmt_real(r.test_macro_f1) << '\t' << r.epochs << '\t'
            << fmt_real(r.sec_per_epoch) << '\t'
            << (r.failed ? "failed: " + sanitize(r.error) : std::string("ok"))
            << '\n';
    }
    if (!out) throw DataError("failed writing " + path);
}

std::vector<SweepRow> read_sweep_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSweepHeader)
        throw DataError(path + ": unrecognized sweep header");

    std::vector<SweepRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_tabs(line);
        if (f.size() != 12)
            throw DataError(path + ": line " + std::to_string(line_no) +
                            " has " + std::to_string(f.size()) +
                            " fields, expected 12");
        SweepRow r;
        r.config_index = parse_index(f[0], "config_index");
        r.config.lr = parse_real(f[1], "lr");
        r.config.weight_decay = parse_real(f[2], "weight_decay");
        r.config.emb_reg = parse_real(f[3], "emb_reg");
        r.config.dropout = parse_real(f[4], "dropout");
        r.config.normalization = normalization_from_string(f[5]);
        r.val_micro_f1 = parse_real(f[6], "val_micro_f1");
        r.test_micro_f1 = parse_real(f[7], "test_micro_f1");
        r.test_macro_f1 = parse_real(f[8], "test_macro_f1");
        r.epochs = parse_index(f[9], "epochs");
        r.sec_per_epoch = parse_real(f[10], "sec_per_epoch");
        if (f[11] == "ok") {
            r.failed = false;
        } else if (f[11].rfind("failed: ", 0) == 0) {
            r.failed = true;
            r.error = f[11].substr(8);
        } else {
            throw DataError(path + ": line " + std::to_string(line_no) +
                            " has unrecognized status '" + f[11] + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace hetegcn
