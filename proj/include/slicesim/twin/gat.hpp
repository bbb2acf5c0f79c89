#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "slicesim/twin/graph.hpp"

namespace slicesim::twin {

// Attention over neighborhoods N_v = {z : A_vz > 0} plus the self-loop.
// alpha[z*V + v] is node z's coefficient toward v, softmax-normalized over
// z within each N_v; entries outside the neighborhood stay zero. The
// projected features u and the pre-activation scores are kept for backward.
struct AttentionResult {
  std::size_t nodes = 0;
  std::vector<std::vector<std::size_t>> neighbors;  // members of N_v, per v
  std::vector<double> u;      // V x D projected features
  std::vector<double> pre;    // V x V LeakyReLU outputs (support only)
  std::vector<double> alpha;  // V x V coefficients

  double coeff(std::size_t z, std::size_t v) const { return alpha[z * nodes + v]; }
};

AttentionResult gat_attention(std::span<const double> features, std::size_t v_count,
                              std::size_t f, const GraphSnapshot& graph,
                              std::span<const double> w_z, std::size_t d,
                              std::span<const double> q, double leaky_slope);

// x'_z = sigmoid(sum_v alpha[z,v] * W_s x_v); returns V x H row-major.
std::vector<double> gat_output(std::span<const double> features,
                               std::size_t v_count, std::size_t f,
                               std::span<const double> alpha,
                               std::span<const double> w_s, std::size_t h);

}  // namespace slicesim::twin
