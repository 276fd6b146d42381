#pragma once

#include <vector>

#include "hetegcn/dense.hpp"
#include "hetegcn/types.hpp"

namespace hetegcn {

/// Row argmax; ties resolved to the lowest column index.
std::vector<index_t> argmax_rows(const DenseMatrix& probs);

/// Micro-averaged F1 over single-label predictions (equals accuracy).
/// DataError on empty input.
real_t micro_f1(const std::vector<index_t>& pred,
                const std::vector<index_t>& truth);

/// Macro-averaged F1 over all k classes; a class with no true and no
/// predicted instances contributes 0. DataError on empty input.
real_t macro_f1(const std::vector<index_t>& pred,
                const std::vector<index_t>& truth, index_t k);

} // namespace hetegcn
