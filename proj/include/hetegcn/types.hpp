#pragma once

#include <cstddef>
#include <cstdint>

namespace hetegcn {

using index_t = std::int64_t;
using real_t = double;

} // namespace hetegcn
