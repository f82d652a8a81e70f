#pragma once

#include <vector>

namespace reg {

using Vector = std::vector<double>;
// Row-major dataset: one training vector per row.
using Matrix = std::vector<Vector>;

}  // namespace reg
