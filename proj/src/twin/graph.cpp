#include "slicesim/twin/graph.hpp"

#include <cmath>
#include <stdexcept>

#include "slicesim/kernels/kernels.hpp"

namespace slicesim::twin {

void GraphSnapshot::validate() const {
  if (a.size() != nodes * nodes || s.size() != nodes * nodes)
    throw std::invalid_argument("graph snapshot shape mismatch");
  for (std::size_t i = 0; i < nodes; ++i) {
    if (adj(i, i) != 0.0)
      throw std::invalid_argument("graph snapshot has a self-edge");
    for (std::size_t j = i + 1; j < nodes; ++j)
      if (adj(i, j) > 0.0 && adj(j, i) > 0.0)
        throw std::invalid_argument("graph snapshot support is not one-directional");
  }
  for (double x : a)
    if (x < 0.0 || x > 1.0)
      throw std::invalid_argument("graph snapshot entries outside [0,1]");
}

GraphSnapshot learn_graph(std::span<const double> features, std::size_t v,
                          std::size_t f, std::span<const double> embeddings,
                          std::size_t e, std::span<const double> theta1,
                          std::span<const double> theta2, std::size_t r,
                          double beta) {
  if (beta <= 0.0) throw std::invalid_argument("learn_graph: beta must be > 0");
  if (features.size() != v * f || embeddings.size() != v * e ||
      theta1.size() != (e + f) * r || theta2.size() != (e + f) * r)
    throw std::invalid_argument("learn_graph: shape mismatch");

  const auto& k = kernels::active();
  const std::size_t c_cols = e + f;
  std::vector<double> c(v * c_cols);
  for (std::size_t i = 0; i < v; ++i) {
    for (std::size_t j = 0; j < e; ++j) c[i * c_cols + j] = embeddings[i * e + j];
    for (std::size_t j = 0; j < f; ++j) c[i * c_cols + e + j] = features[i * f + j];
  }

  // Theta matrices are stored column-major (r columns of length e+f) so
  // each projection is a plain dot product.
  auto project = [&](std::span<const double> theta, std::vector<double>& m) {
    m.resize(v * r);
    for (std::size_t i = 0; i < v; ++i)
      for (std::size_t j = 0; j < r; ++j)
        m[i * r + j] = std::tanh(
            beta * k.dot(c.data() + i * c_cols, theta.data() + j * c_cols, c_cols));
  };
  std::vector<double> m1, m2;
  project(theta1, m1);
  project(theta2, m2);

  GraphSnapshot snap;
  snap.nodes = v;
  snap.s.resize(v * v);
  snap.a.resize(v * v);
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t j = 0; j < v; ++j) {
      const double forward = k.dot(m1.data() + i * r, m2.data() + j * r, r);
      const double reverse = k.dot(m2.data() + i * r, m1.data() + j * r, r);
      const double score = std::tanh(beta * (forward - reverse));
      snap.s[i * v + j] = score;
      snap.a[i * v + j] = std::max(0.0, score);
    }
  return snap;
}

}  // namespace slicesim::twin
