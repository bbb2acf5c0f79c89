#pragma once

#include <span>

#include "slicesim/radio/types.hpp"

namespace slicesim::radio {

// Applies per-slice RB deltas, clamps each grant into [1, kappa], then, if
// the pool is oversubscribed, scales the portion above the 1-RB floor
// proportionally (rounding down) until the total fits. Always returns a
// feasible state.
AllocationState apply_allocation(const AllocationState& state,
                                 std::span<const int> deltas);

}  // namespace slicesim::radio
