#include "hetegcn/metrics.hpp"

#include "hetegcn/error.hpp"

namespace hetegcn {

std::vector<index_t> argmax_rows(const DenseMatrix& probs) {
    std::vector<index_t> out(static_cast<std::size_t>(probs.n_rows()));
    for (index_t i = 0; i < probs.n_rows(); ++i) {
        index_t best = 0;
        for (index_t j = 1; j < probs.n_cols(); ++j) {
            if (probs(i, j) > probs(i, best)) best = j;
        }
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

real_t micro_f1(const std::vector<index_t>& pred,
                const std::vector<index_t>& truth) {
    if (pred.size() != truth.size())
        throw ShapeError("micro_f1: prediction/truth length mismatch");
    if (pred.empty()) throw DataError("micro_f1: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hits;
    return static_cast<real_t>(hits) / static_cast<real_t>(pred.size());
}

real_t macro_f1(const std::vector<index_t>& pred,
                const std::vector<index_t>& truth, index_t k) {
    if (pred.size() != truth.size())
        throw ShapeError("macro_f1: prediction/truth length mismatch");
    if (k <= 0) throw DomainError("macro_f1: class count must be positive");
    if (pred.empty()) throw DataError("macro_f1: empty input");

    std::vector<index_t> tp(static_cast<std::size_t>(k), 0);
    std::vector<index_t> fp(static_cast<std::size_t>(k), 0);
    std::vector<index_t> fn(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const index_t p = pred[i];
        const index_t t = truth[i];
        if (p < 0 || p >= k || t < 0 || t >= k)
            throw DomainError("macro_f1: label outside [0, k)");
        if (p == t) {
            ++tp[static_cast<std::size_t>(p)];
        } else {
            ++fp[static_cast<std::size_t>(p)];
            ++fn[static_cast<std::size_t>(t)];
        }
    }
    real_t sum = 0.0;
    for (index_t c = 0; c < k; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const real_t tpc = static_cast<real_t>(tp[cc]);
        const real_t prec_den = tpc + static_cast<real_t>(fp[cc]);
        const real_t rec_den = tpc + static_cast<real_t>(fn[cc]);
        const real_t prec = prec_den > 0 ? tpc / prec_den : 0.0;
        const real_t rec = rec_den > 0 ? tpc / rec_den : 0.0;
        const real_t den = prec + rec;
        sum += den > 0 ? 2.0 * prec * rec / den : 0.0;
    }
    return sum / static_cast<real_t>(k);
}

} // namespace hetegcn
