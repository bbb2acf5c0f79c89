#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace slicesim::twin {

// Adjacency learned from data. The pre-ReLU score matrix S is antisymmetric,
// so A = ReLU(S) has a zero diagonal and one-directional edges.
struct GraphSnapshot {
  std::size_t nodes = 0;
  std::vector<double> a;  // V x V, row-major
  std::vector<double> s;  // V x V, pre-ReLU scores

  double adj(std::size_t i, std::size_t j) const { return a[i * nodes + j]; }
  double score(std::size_t i, std::size_t j) const { return s[i * nodes + j]; }
  void validate() const;
};

// A = ReLU(tanh(beta * (M1 M2^T - M2 M1^T))) with M1 = tanh(beta * C Theta1),
// M2 = tanh(beta * C Theta2), where C = [E || B] stacks the static node
// embeddings with the current window features. Two distinct projections keep
// the difference from vanishing identically; passing theta1 == theta2
// reproduces the degenerate A = 0 case.
GraphSnapshot learn_graph(std::span<const double> features, std::size_t v,
                          std::size_t f, std::span<const double> embeddings,
                          std::size_t e, std::span<const double> theta1,
                          std::span<const double> theta2, std::size_t r,
                          double beta);

}  // namespace slicesim::twin
