#include "slicesim/twin/gat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slicesim/kernels/kernels.hpp"

namespace slicesim::twin {

AttentionResult gat_attention(std::span<const double> features,
                              std::size_t v_count, std::size_t f,
                              const GraphSnapshot& graph,
                              std::span<const double> w_z, std::size_t d,
                              std::span<const double> q, double leaky_slope) {
  if (features.size() != v_count * f || graph.nodes != v_count ||
      w_z.size() != d * f || q.size() != 2 * d)
    throw std::invalid_argument("gat_attention: shape mismatch");

  const auto& k = kernels::active();
  AttentionResult res;
  res.nodes = v_count;
  res.u.resize(v_count * d);
  for (std::size_t z = 0; z < v_count; ++z)
    for (std::size_t i = 0; i < d; ++i)
      res.u[z * d + i] = k.dot(w_z.data() + i * f, features.data() + z * f, f);

  res.neighbors.resize(v_count);
  res.pre.assign(v_count * v_count, 0.0);
  res.alpha.assign(v_count * v_count, 0.0);
  for (std::size_t v = 0; v < v_count; ++v) {
    std::vector<std::size_t>& nv = res.neighbors[v];
    for (std::size_t z = 0; z < v_count; ++z)
      if (z == v || graph.adj(v, z) > 0.0) nv.push_back(z);

    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t z : nv) {
      const double raw = k.dot(q.data(), res.u.data() + z * d, d) +
                         k.dot(q.data() + d, res.u.data() + v * d, d);
      const double act = raw > 0.0 ? raw : leaky_slope * raw;
      res.pre[z * v_count + v] = act;
      mx = std::max(mx, act);
    }
    double denom = 0.0;
    for (std::size_t z : nv) {
      const double w = std::exp(res.pre[z * v_count + v] - mx);
      res.alpha[z * v_count + v] = w;
      denom += w;
    }
    for (std::size_t z : nv) res.alpha[z * v_count + v] /= denom;
  }
  return res;
}

std::vector<double> gat_output(std::span<const double> features,
                               std::size_t v_count, std::size_t f,
                               std::span<const double> alpha,
                               std::span<const double> w_s, std::size_t h) {
  if (features.size() != v_count * f || alpha.size() != v_count * v_count ||
      w_s.size() != h * f)
    throw std::invalid_argument("gat_output: shape mismatch");

  const auto& k = kernels::active();
  std::vector<double> proj(v_count * h);
  for (std::size_t v = 0; v < v_count; ++v)
    for (std::size_t i = 0; i < h; ++i)
      proj[v * h + i] = k.dot(w_s.data() + i * f, features.data() + v * f, f);

  std::vector<double> out(v_count * h, 0.0);
  for (std::size_t z = 0; z < v_count; ++z) {
    for (std::size_t v = 0; v < v_count; ++v) {
      const double a = alpha[z * v_count + v];
      if (a != 0.0) k.axpy(a, proj.data() + v * h, out.data() + z * h, h);
    }
    for (std::size_t i = 0; i < h; ++i)
      out[z * h + i] = 1.0 / (1.0 + std::exp(-out[z * h + i]));
  }
  return out;
}

}  // namespace slicesim::twin
