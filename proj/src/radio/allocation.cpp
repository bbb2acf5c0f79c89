#include "slicesim/radio/allocation.hpp"

#include <algorithm>
#include <stdexcept>

namespace slicesim::radio {

AllocationState apply_allocation(const AllocationState& state,
                                 std::span<const int> deltas) {
  state.validate();
  if (deltas.size() != state.rbs.size())
    throw std::invalid_argument("apply_allocation: one delta per slice required");

  AllocationState next = state;
  const long long m = static_cast<long long>(next.rbs.size());
  long long total = 0;
  for (std::size_t i = 0; i < next.rbs.size(); ++i) {
    next.rbs[i] = std::clamp(state.rbs[i] + deltas[i], 1, state.kappa);
    total += next.rbs[i];
  }

  const long long pool = state.total_rbs;
  if (total > pool) {
    // Scale the grants above the 1-RB floor so the total fits the pool;
    // exact integer arithmetic keeps the projection deterministic.
    const long long head = total - m;
    const long long budget = pool - m;
    for (int& w : next.rbs)
      w = 1 + static_cast<int>((static_cast<long long>(w) - 1) * budget / head);
  }
  return next;
}

}  // namespace slicesim::radio
