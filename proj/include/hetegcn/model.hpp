#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetegcn/dense.hpp"
#include "hetegcn/graphs.hpp"
#include "hetegcn/rng.hpp"
#include "hetegcn/sparse.hpp"
#include "hetegcn/types.hpp"

namespace hetegcn {

enum class GraphToken { F, X, TX, N };
enum class Activation { relu, softmax, identity };
enum class Entity { word, doc };
enum class InputMode { onehot, X_features, external };
enum class FuseCombine { sum, concat };

const char* to_string(GraphToken t);
const char* to_string(Entity e);
InputMode input_mode_from_string(const std::string& s);
const char* to_string(InputMode m);
FuseCombine fuse_combine_from_string(const std::string& s);
const char* to_string(FuseCombine c);

/// Entity typing is fixed by the token: F word->word, X word->doc,
/// TX doc->word, N doc->doc.
Entity token_in_entity(GraphToken t);
Entity token_out_entity(GraphToken t);

struct LayerSpec {
    GraphToken graph;
    Activation activation;
    Entity in_entity;
    Entity out_entity;
};

struct FuseSpec {
    std::vector<GraphToken> branches;
    FuseCombine combine = FuseCombine::sum;
};

struct ArchitectureSpec {
    std::string name; // token string, e.g. "X-TX-X" or "fuse(F,TX)-X"
    std::vector<LayerSpec> layers; // post-fusion chain when fuse is set
    std::optional<FuseSpec> fuse;
    InputMode input_mode = InputMode::onehot;
    index_t hidden_dim = 200;
    bool simplified = false;

    // Branch layers materialized from fuse (one layer per branch token).
    std::vector<LayerSpec> branch_layers;
    /// Total number of weight matrices (branches + chain).
    std::size_t n_weights() const {
        return branch_layers.size() + layers.size();
    }
};

/// Parse the token-string grammar and assign activations: relu (identity
/// in simplified mode) everywhere except a final softmax.
ArchitectureSpec parse_architecture(const std::string& name,
                                    InputMode input_mode, index_t hidden_dim,
                                    bool simplified,
                                    FuseCombine combine = FuseCombine::sum);

/// Check entity-chain compatibility; returns the first layer's input
/// entity. Throws ConfigError naming the offending layer pair.
Entity validate_architecture(const ArchitectureSpec& a);

struct Dims {
    index_t n = 0; // docs
    index_t m = 0; // words
    index_t k = 0; // classes
    index_t external_dim = -1;
};

/// Weight shapes in parameter order: branch weights first, then the chain.
std::vector<std::pair<index_t, index_t>> weight_shapes(
    const ArchitectureSpec& a, const Dims& dims);

index_t parameter_count(const ArchitectureSpec& a, const Dims& dims);

struct ModelParams {
    std::vector<DenseMatrix> weights;
    std::uint64_t seed = 0;
};

/// Glorot-uniform init, bound sqrt(6 / (fan_in + fan_out)); one stream
/// seeded by derive_seed(seed, "init") fills the weights in order.
ModelParams init_params(const ArchitectureSpec& a, const Dims& dims,
                        std::uint64_t seed);

/// Normalized graph operators (and their transposes, for backward) for
/// each token an architecture uses. TX is normalized independently of X:
/// the operator is normalize(transpose(X_raw), mode).
struct CompiledGraphs {
    std::map<GraphToken, SparseMatrix> ops;
    std::map<GraphToken, SparseMatrix> ops_t;
    index_t n = 0;
    index_t m = 0;

    const SparseMatrix& op(GraphToken t) const;
    const SparseMatrix& op_t(GraphToken t) const;
};

CompiledGraphs compile_graphs(const GraphSet& g, Normalization mode,
                              const ArchitectureSpec& a);

/// How a layer consumed its input; fixes the backward path.
enum class InputKind { onehot, sparse_features, dense };

struct LayerTrace {
    InputKind kind = InputKind::dense;
    std::vector<std::uint8_t> mask; // empty when no dropout was applied
    real_t scale = 1.0;             // inverted-dropout scale 1/(1-p)
    SparseMatrix x_drop;            // sparse_features path: dropped input
    DenseMatrix b;                  // dense path: G * drop(E_in)
    DenseMatrix z;                  // pre-activation
    DenseMatrix e_out;              // post-activation
};

struct ForwardTrace {
    std::vector<LayerTrace> branches;
    DenseMatrix fused; // combined branch output (fusion only)
    std::vector<LayerTrace> layers;

    const DenseMatrix& probs() const { return layers.back().e_out; }
};

/// One full forward pass: layer l computes act(G_l * drop(E_in) * W_l).
/// The one-hot first layer short-circuits I*W to a row-dropout on W. In
/// training mode with dropout_p > 0 masks are drawn from rng and recorded
/// for replay; eval mode applies no dropout and records no masks.
ForwardTrace forward(const ArchitectureSpec& a, const ModelParams& p,
                     const CompiledGraphs& g, const SparseMatrix* x_features,
                     const DenseMatrix* external, real_t dropout_p,
                     bool training, Rng& rng);

/// Row-wise softmax with max-subtraction; each output row sums to 1.
void softmax_rows(DenseMatrix& z);

// Dense matrix binary format: two 64-bit little-endian counts (rows,
// cols) followed by row-major 64-bit reals.
void write_dense_bin(const std::string& path, const DenseMatrix& m);
DenseMatrix read_dense_bin(const std::string& path);

struct CheckpointMeta {
    std::string architecture;
    InputMode input_mode = InputMode::onehot;
    Dims dims;
    index_t hidden_dim = 200;
    bool simplified = false;
    FuseCombine combine = FuseCombine::sum;
    Normalization normalization = Normalization::sym;
    GraphMode mode = GraphMode::transductive;
    std::uint64_t seed = 0;

    ArchitectureSpec to_architecture() const;
};

// Checkpoint directory: manifest.json plus weights_<i>.bin per layer.
void save_checkpoint(const std::string& dir, const CheckpointMeta& meta,
                     const ModelParams& params);
std::pair<CheckpointMeta, ModelParams> load_checkpoint(const std::string& dir);

} // namespace hetegcn
