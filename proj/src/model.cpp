#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "hetegcn/error.hpp"
#include "hetegcn/kernels.hpp"
#include "hetegcn/model.hpp"

namespace hetegcn {

const char* to_string(GraphToken t) {
    switch (t) {
        case GraphToken::F: return "F";
        case GraphToken::X: return "X";
        case GraphToken::TX: return "TX";
        case GraphToken::N: return "N";
    }
    return "?";
}

const char* to_string(Entity e) { return e == Entity::word ? "word" : "doc"; }

InputMode input_mode_from_string(const std::string& s) {
    if (s == "onehot") return InputMode::onehot;
    if (s == "X_features") return InputMode::X_features;
    if (s == "external") return InputMode::external;
    throw ConfigError("unknown input mode: " + s);
}

const char* to_string(InputMode m) {
    switch (m) {
        case InputMode::onehot: return "onehot";
        case InputMode::X_features: return "X_features";
        case InputMode::external: return "external";
    }
    return "?";
}

FuseCombine fuse_combine_from_string(const std::string& s) {
    if (s == "sum") return FuseCombine::sum;
    if (s == "concat") return FuseCombine::concat;
    throw ConfigError("unknown fuse combine: " + s);
}

const char* to_string(FuseCombine c) {
    return c == FuseCombine::sum ? "sum" : "concat";
}

Entity token_in_entity(GraphToken t) {
    switch (t) {
        case GraphToken::F: return Entity::word;
        case GraphToken::X: return Entity::word;
        case GraphToken::TX: return Entity::doc;
        case GraphToken::N: return Entity::doc;
    }
    return Entity::word;
}

Entity token_out_entity(GraphToken t) {
    switch (t) {
        case GraphToken::F: return Entity::word;
        case GraphToken::X: return Entity::doc;
        case GraphToken::TX: return Entity::word;
        case GraphToken::N: return Entity::doc;
    }
    return Entity::doc;
}

namespace {

GraphToken token_from_string(const std::string& s, const std::string& name) {
    if (s == "F") return GraphToken::F;
    if (s == "X") return GraphToken::X;
    if (s == "TX") return GraphToken::TX;
    if (s == "N") return GraphToken::N;
    throw ConfigError("unknown graph token '" + s + "' in architecture '" +
                      name + "'");
}

LayerSpec make_layer(GraphToken t, Activation act) {
    return {t, act, token_in_entity(t), token_out_entity(t)};
}

index_t entity_size(Entity e, const Dims& dims) {
    return e == Entity::word ? dims.m : dims.n;
}

} // namespace

ArchitectureSpec parse_architecture(const std::string& name,
                                    InputMode input_mode, index_t hidden_dim,
                                    bool simplified, FuseCombine combine) {
    if (name.empty()) throw ConfigError("empty architecture string");
    if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");

    std::vector<std::string> raw;
    std::string cur;
    for (char ch : name) {
        if (ch == '-') {
            raw.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    raw.push_back(cur);

    ArchitectureSpec a;
    a.name = name;
    a.input_mode = input_mode;
    a.hidden_dim = hidden_dim;
    a.simplified = simplified;

    const Activation hidden_act =
        simplified ? Activation::identity : Activation::relu;

    std::vector<GraphToken> chain;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const std::string& tok = raw[i];
        if (tok.empty())
            throw ConfigError("empty token in architecture '" + name + "'");
        if (tok.rfind("fuse(", 0) == 0) {
            if (i != 0)
                throw ConfigError("fuse(...) must be the first token in '" +
                                  name + "'");
            if (tok.back() != ')')
                throw ConfigError("unterminated fuse(...) in '" + name + "'");
            FuseSpec fuse;
            fuse.combine = combine;
            std::string inner = tok.substr(5, tok.size() - 6);
            std::string branch;
            for (char ch : inner + ",") {
                if (ch == ',') {
                    if (branch.empty())
                        throw ConfigError("empty fuse branch in '" + name + "'");
                    fuse.branches.push_back(token_from_string(branch, name));
                    branch.clear();
                } else {
                    branch.push_back(ch);
                }
            }
            if (fuse.branches.size() < 2)
                throw ConfigError("fuse(...) needs at least two branches");
            a.fuse = std::move(fuse);
        } else {
            chain.push_back(token_from_string(tok, name));
        }
    }

    if (chain.empty())
        throw ConfigError("architecture '" + name +
                          "' has no layer to end in softmax");
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const bool last = i + 1 == chain.size();
        a.layers.push_back(
            make_layer(chain[i], last ? Activation::softmax : hidden_act));
    }
    if (a.fuse) {
        for (GraphToken t : a.fuse->branches)
            a.branch_layers.push_back(make_layer(t, hidden_act));
    }
    validate_architecture(a);
    return a;
}

Entity validate_architecture(const ArchitectureSpec& a) {
    if (a.layers.empty()) throw ConfigError("architecture has no layers");

    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const bool last = i + 1 == a.layers.size();
        if (a.layers[i].activation == Activation::softmax && !last)
            throw ConfigError("softmax before the final layer (layer " +
                              std::to_string(i) + ")");
        if (last && a.layers[i].activation != Activation::softmax)
            throw ConfigError("final layer must apply softmax");
        if (!last &&
            a.layers[i].out_entity != a.layers[i + 1].in_entity) {
            throw ConfigError(
                "incompatible layers " + std::to_string(i) + " and " +
                std::to_string(i + 1) + ": " +
                to_string(a.layers[i].graph) + " outputs " +
                to_string(a.layers[i].out_entity) + " but " +
                to_string(a.layers[i + 1].graph) + " consumes " +
                to_string(a.layers[i + 1].in_entity));
        }
    }
    if (a.layers.back().out_entity != Entity::doc)
        throw ConfigError("final layer must produce doc embeddings, got " +
                          std::string(to_string(a.layers.back().out_entity)));

    if (a.fuse) {
        if (a.branch_layers.size() != a.fuse->branches.size())
            throw ConfigError("fuse branches not materialized");
        if (a.input_mode != InputMode::onehot)
            throw ConfigError("fusion requires one-hot input mode");
        const Entity out = a.branch_layers.front().out_entity;
        for (const LayerSpec& b : a.branch_layers) {
            if (b.out_entity != out)
                throw ConfigError(
                    std::string("fuse branches disagree on output entity: ") +
                    to_string(b.graph) + " yields " + to_string(b.out_entity));
        }
        if (a.layers.front().in_entity != out)
            throw ConfigError(
                std::string("fused ") + to_string(out) +
                " embeddings feed a layer consuming " +
                to_string(a.layers.front().in_entity));
        return a.branch_layers.front().in_entity;
    }

    if (a.input_mode == InputMode::X_features &&
        a.layers.front().in_entity != Entity::doc) {
        throw ConfigError("X_features input provides doc rows but layer 0 (" +
                          std::string(to_string(a.layers.front().graph)) +
                          ") consumes word embeddings");
    }
    return a.layers.front().in_entity;
}

std::vector<std::pair<index_t, index_t>> weight_shapes(
    const ArchitectureSpec& a, const Dims& dims) {
    validate_architecture(a);
    if (dims.n < 1 || dims.m < 1 || dims.k < 1)
        throw ConfigError("dims must be positive");
    const index_t d = a.hidden_dim;
    std::vector<std::pair<index_t, index_t>> shapes;

    index_t chain_in;
    if (a.fuse) {
        for (const LayerSpec& b : a.branch_layers)
            shapes.push_back({entity_size(b.in_entity, dims), d});
        chain_in = a.fuse->combine == FuseCombine::concat
                       ? d * static_cast<index_t>(a.branch_layers.size())
                       : d;
    } else {
        switch (a.input_mode) {
            case InputMode::onehot:
                chain_in = entity_size(a.layers.front().in_entity, dims);
                break;
            case InputMode::X_features:
                chain_in = dims.m;
                break;
            case InputMode::external:
                if (dims.external_dim < 1)
                    throw ConfigError(
                        "external input mode needs external_dim");
                chain_in = dims.external_dim;
                break;
            default:
                throw ConfigError("unhandled input mode");
        }
    }

    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const bool last = i + 1 == a.layers.size();
        shapes.push_back({i == 0 ? chain_in : d, last ? dims.k : d});
    }
    return shapes;
}

index_t parameter_count(const ArchitectureSpec& a, const Dims& dims) {
    index_t total = 0;
    for (const auto& [r, c] : weight_shapes(a, dims)) total += r * c;
    return total;
}

ModelParams init_params(const ArchitectureSpec& a, const Dims& dims,
                        std::uint64_t seed) {
    ModelParams p;
    p.seed = seed;
    Rng rng(derive_seed(seed, "init"));
    for (const auto& [rows, cols] : weight_shapes(a, dims)) {
        const real_t bound =
            std::sqrt(6.0 / static_cast<real_t>(rows + cols));
        DenseMatrix w(rows, cols);
        real_t* data = w.data();
        for (index_t i = 0; i < w.size(); ++i)
            data[i] = rng.next_symmetric(bound);
        p.weights.push_back(std::move(w));
    }
    return p;
}

const SparseMatrix& CompiledGraphs::op(GraphToken t) const {
    auto it = ops.find(t);
    if (it == ops.end())
        throw ConfigError(std::string("graph operator ") + to_string(t) +
                          " was not compiled");
    return it->second;
}

const SparseMatrix& CompiledGraphs::op_t(GraphToken t) const {
    auto it = ops_t.find(t);
    if (it == ops_t.end())
        throw ConfigError(std::string("graph operator ") + to_string(t) +
                          " was not compiled");
    return it->second;
}

CompiledGraphs compile_graphs(const GraphSet& g, Normalization mode,
                              const ArchitectureSpec& a) {
    std::set<GraphToken> needed;
    for (const LayerSpec& l : a.layers) needed.insert(l.graph);
    for (const LayerSpec& l : a.branch_layers) needed.insert(l.graph);

    CompiledGraphs c;
    c.n = g.X.n_rows();
    c.m = g.X.n_cols();
    for (GraphToken t : needed) {
        SparseMatrix op;
        switch (t) {
            case GraphToken::X:
                op = normalize(g.X, mode);
                break;
            case GraphToken::TX:
                op = normalize(transpose(g.X), mode);
                break;
            case GraphToken::F:
                if (g.F.n_rows() == 0)
                    throw ConfigError(
                        "architecture needs F but no PMI graph was built");
                op = normalize(g.F, mode);
                break;
            case GraphToken::N:
                if (!g.N.has_value())
                    throw ConfigError(
                        "architecture needs N but no kNN graph was built");
                op = normalize(*g.N, mode);
                break;
        }
        c.ops_t.emplace(t, transpose(op));
        c.ops.emplace(t, std::move(op));
    }
    return c;
}

void softmax_rows(DenseMatrix& z) {
    for (index_t i = 0; i < z.n_rows(); ++i) {
        real_t* row = z.row(i);
        real_t mx = row[0];
        for (index_t j = 1; j < z.n_cols(); ++j) mx = std::max(mx, row[j]);
        real_t sum = 0.0;
        for (index_t j = 0; j < z.n_cols(); ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (index_t j = 0; j < z.n_cols(); ++j) row[j] /= sum;
    }
}

namespace {

std::vector<std::uint8_t> draw_mask(Rng& rng, std::size_t n, real_t p) {
    std::vector<std::uint8_t> mask(n);
    for (std::size_t i = 0; i < n; ++i)
        mask[i] = rng.next_double() >= p ? 1 : 0;
    return mask;
}

DenseMatrix apply_activation(const LayerSpec& spec, const DenseMatrix& z) {
    switch (spec.activation) {
        case Activation::relu: {
            DenseMatrix out(z.n_rows(), z.n_cols());
            kernels::relu(out.data(), z.data(),
                          static_cast<std::size_t>(z.size()));
            return out;
        }
        case Activation::softmax: {
            DenseMatrix out = z;
            softmax_rows(out);
            return out;
        }
        case Activation::identity:
            return z;
    }
    throw ConfigError("unhandled activation");
}

LayerTrace run_layer(const LayerSpec& spec, const SparseMatrix& g,
                     const DenseMatrix& w, InputKind kind,
                     const DenseMatrix* e_in, const SparseMatrix* x_in,
                     real_t p, bool use_drop, Rng& rng) {
    LayerTrace t;
    t.kind = kind;
    const real_t scale = use_drop ? 1.0 / (1.0 - p) : 1.0;
    t.scale = scale;

    switch (kind) {
        case InputKind::onehot: {
            // drop(I) * W is a row-dropout on W.
            DenseMatrix w_drop = w;
            if (use_drop) {
                t.mask = draw_mask(rng, static_cast<std::size_t>(w.n_rows()), p);
                for (index_t r = 0; r < w_drop.n_rows(); ++r) {
                    real_t* row = w_drop.row(r);
                    const auto cols = static_cast<std::size_t>(w_drop.n_cols());
                    if (t.mask[r]) {
                        kernels::scal(row, scale, cols);
                    } else {
                        std::fill(row, row + cols, 0.0);
                    }
                }
            }
            t.z = spmm(g, w_drop);
            break;
        }
        case InputKind::sparse_features: {
            // Not canonical CSR: dropout may leave explicit zeros; the
            // matrix is trace-internal and only multiplied.
            t.x_drop = *x_in;
            if (use_drop) {
                t.mask = draw_mask(rng, t.x_drop.values().size(), p);
                auto& vals = t.x_drop.mutable_values();
                kernels::apply_mask(vals.data(), t.mask.data(), scale,
                                    vals.size());
            }
            t.z = spmm(g, spmm(t.x_drop, w));
            break;
        }
        case InputKind::dense: {
            DenseMatrix dropped = *e_in;
            if (use_drop) {
                t.mask = draw_mask(
                    rng, static_cast<std::size_t>(dropped.size()), p);
                kernels::apply_mask(dropped.data(), t.mask.data(), scale,
                                    static_cast<std::size_t>(dropped.size()));
            }
            t.b = spmm(g, dropped);
            t.z = gemm_nn(t.b, w);
            break;
        }
    }
    t.e_out = apply_activation(spec, t.z);
    return t;
}

} // namespace

ForwardTrace forward(const ArchitectureSpec& a, const ModelParams& p,
                     const CompiledGraphs& g, const SparseMatrix* x_features,
                     const DenseMatrix* external, real_t dropout_p,
                     bool training, Rng& rng) {
    if (!(dropout_p >= 0.0 && dropout_p <= 0.75))
        throw ConfigError("dropout must lie in [0, 0.75]");
    if (p.weights.size() != a.n_weights())
        throw ShapeError("parameter count does not match architecture");
    const bool use_drop = training && dropout_p > 0.0;

    ForwardTrace trace;
    std::size_t w_idx = 0;

    if (a.fuse) {
        for (std::size_t b = 0; b < a.branch_layers.size(); ++b) {
            const LayerSpec& spec = a.branch_layers[b];
            try {
                trace.branches.push_back(
                    run_layer(spec, g.op(spec.graph), p.weights[w_idx],
                              InputKind::onehot, nullptr, nullptr, dropout_p,
                              use_drop, rng));
            } catch (const ShapeError& e) {
                throw ShapeError("branch " + std::to_string(b) + ": " +
                                 e.what());
            }
            ++w_idx;
        }
        const index_t rows = trace.branches.front().e_out.n_rows();
        const index_t d = trace.branches.front().e_out.n_cols();
        if (a.fuse->combine == FuseCombine::sum) {
            trace.fused = trace.branches.front().e_out;
            for (std::size_t b = 1; b < trace.branches.size(); ++b) {
                kernels::axpy(trace.fused.data(), 1.0,
                              trace.branches[b].e_out.data(),
                              static_cast<std::size_t>(trace.fused.size()));
            }
        } else {
            trace.fused = DenseMatrix(
                rows, d * static_cast<index_t>(trace.branches.size()));
            for (index_t i = 0; i < rows; ++i) {
                for (std::size_t b = 0; b < trace.branches.size(); ++b) {
                    const real_t* src = trace.branches[b].e_out.row(i);
                    std::copy(src, src + d,
                              trace.fused.row(i) +
                                  d * static_cast<index_t>(b));
                }
            }
        }
    }

    const DenseMatrix* e_in = a.fuse ? &trace.fused : nullptr;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const LayerSpec& spec = a.layers[i];
        InputKind kind = InputKind::dense;
        const SparseMatrix* x_in = nullptr;
        if (i == 0 && !a.fuse) {
            switch (a.input_mode) {
                case InputMode::onehot:
                    kind = InputKind::onehot;
                    break;
                case InputMode::X_features:
                    if (!x_features)
                        throw ConfigError(
                            "X_features input mode needs the feature matrix");
                    kind = InputKind::sparse_features;
                    x_in = x_features;
                    break;
                case InputMode::external:
                    if (!external)
                        throw ConfigError(
                            "external input mode needs an embedding matrix");
                    kind = InputKind::dense;
                    e_in = external;
                    break;
            }
        }
        try {
            trace.layers.push_back(run_layer(spec, g.op(spec.graph),
                                             p.weights[w_idx], kind, e_in,
                                             x_in, dropout_p, use_drop, rng));
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + ": " + e.what());
        }
        ++w_idx;
        e_in = &trace.layers.back().e_out;
    }
    return trace;
}

namespace {

void put_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = (v >> (8 * i)) & 0xff;
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64_le(std::istream& in, const std::string& path) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8))
        throw DataError(path + ": truncated dense matrix file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
    return v;
}

} // namespace

void write_dense_bin(const std::string& path, const DenseMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    put_u64_le(out, static_cast<std::uint64_t>(m.n_rows()));
    put_u64_le(out, static_cast<std::uint64_t>(m.n_cols()));
    for (index_t i = 0; i < m.size(); ++i)
        put_u64_le(out, std::bit_cast<std::uint64_t>(m.data()[i]));
    if (!out) throw DataError("write failed: " + path);
}

DenseMatrix read_dense_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    const auto rows = static_cast<index_t>(get_u64_le(in, path));
    const auto cols = static_cast<index_t>(get_u64_le(in, path));
    if (rows < 0 || cols < 0 || rows * cols > (index_t{1} << 40))
        throw DataError(path + ": implausible dense matrix header");
    DenseMatrix m(rows, cols);
    for (index_t i = 0; i < m.size(); ++i)
        m.data()[i] = std::bit_cast<real_t>(get_u64_le(in, path));
    char extra;
    if (in.read(&extra, 1))
        throw DataError(path + ": trailing bytes after matrix data");
    return m;
}

ArchitectureSpec CheckpointMeta::to_architecture() const {
    return parse_architecture(architecture, input_mode, hidden_dim,
                              simplified, combine);
}

void save_checkpoint(const std::string& dir, const CheckpointMeta& meta,
                     const ModelParams& params) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["architecture"] = meta.architecture;
    j["input_mode"] = to_string(meta.input_mode);
    j["n"] = meta.dims.n;
    j["m"] = meta.dims.m;
    j["k"] = meta.dims.k;
    j["external_dim"] = meta.dims.external_dim;
    j["hidden_dim"] = meta.hidden_dim;
    j["simplified"] = meta.simplified;
    j["combine"] = to_string(meta.combine);
    j["normalization"] = to_string(meta.normalization);
    j["mode"] = to_string(meta.mode);
    j["seed"] = meta.seed;
    j["n_weights"] = params.weights.size();

    std::ofstream out(dir + "/manifest.json");
    if (!out) throw DataError("cannot open for writing: " + dir +
                              "/manifest.json");
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + dir + "/manifest.json");

    for (std::size_t i = 0; i < params.weights.size(); ++i)
        write_dense_bin(dir + "/weights_" + std::to_string(i) + ".bin",
                        params.weights[i]);
}

std::pair<CheckpointMeta, ModelParams> load_checkpoint(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw DataError("cannot open checkpoint manifest in " + dir);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(dir + "/manifest.json: invalid JSON: " + e.what());
    }

    CheckpointMeta meta;
    try {
        meta.architecture = j.at("architecture").get<std::string>();
        meta.input_mode =
            input_mode_from_string(j.at("input_mode").get<std::string>());
        meta.dims.n = j.at("n").get<index_t>();
        meta.dims.m = j.at("m").get<index_t>();
        meta.dims.k = j.at("k").get<index_t>();
        meta.dims.external_dim = j.at("external_dim").get<index_t>();
        meta.hidden_dim = j.at("hidden_dim").get<index_t>();
        meta.simplified = j.at("simplified").get<bool>();
        meta.combine =
            fuse_combine_from_string(j.at("combine").get<std::string>());
        meta.normalization = normalization_from_string(
            j.at("normalization").get<std::string>());
        meta.mode = graph_mode_from_string(j.at("mode").get<std::string>());
        meta.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(dir + "/manifest.json: missing or invalid key: " +
                        e.what());
    }

    const ArchitectureSpec arch = meta.to_architecture();
    const auto shapes = weight_shapes(arch, meta.dims);
    const auto n_weights = j.at("n_weights").get<std::size_t>();
    if (n_weights != shapes.size())
        throw DataError(dir + ": manifest weight count " +
                        std::to_string(n_weights) +
                        " does not match architecture (" +
                        std::to_string(shapes.size()) + ")");

    ModelParams params;
    params.seed = meta.seed;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        DenseMatrix w =
            read_dense_bin(dir + "/weights_" + std::to_string(i) + ".bin");
        if (w.n_rows() != shapes[i].first || w.n_cols() != shapes[i].second)
            throw DataError(dir + ": weights_" + std::to_string(i) +
                            ".bin shape mismatch");
        params.weights.push_back(std::move(w));
    }
    return {meta, params};
}

} // namespace hetegcn
