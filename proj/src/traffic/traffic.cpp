#include "slicesim/traffic/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "slicesim/core/csv.hpp"
#include "slicesim/core/rng.hpp"

namespace slicesim::traffic {

void DemandTensor::validate() const {
  if (values.size() != channels * steps * nodes)
    throw std::invalid_argument("demand tensor shape mismatch");
  for (double v : values)
    if (v < 0.0 || !std::isfinite(v))
      throw std::invalid_argument("demand tensor entries must be finite and >= 0");
}

LatentTopology gen_topology(std::size_t v, std::uint64_t seed,
                            const TopologyOptions& opt) {
  if (v < 2) throw std::invalid_argument("gen_topology: need at least 2 nodes");
  if (opt.rho < 0.0 || opt.rho >= 1.0)
    throw std::invalid_argument("gen_topology: rho must lie in [0, 1)");

  LatentTopology topo;
  topo.rho = opt.rho;
  Rng rng(mix_seed(seed, 0x70B0));
  topo.x_m.resize(v);
  topo.y_m.resize(v);
  for (std::size_t i = 0; i < v; ++i) {
    const double d = std::sqrt(rng.uniform01()) * opt.cell_radius_m;
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    topo.x_m[i] = d * std::cos(angle);
    topo.y_m[i] = d * std::sin(angle);
  }

  topo.adjacency.assign(v * v, 0.0);
  for (std::size_t i = 0; i < v; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      if (i == j) continue;
      const double dx = topo.x_m[i] - topo.x_m[j];
      const double dy = topo.y_m[i] - topo.y_m[j];
      const double w = std::exp(-std::sqrt(dx * dx + dy * dy) / opt.scale_m);
      topo.adjacency[i * v + j] = w;
      row_sum += w;
    }
    // Dividing by max(1, sum) keeps rows sub-stochastic while letting a
    // vanishing interaction scale drive all off-diagonal weight to zero.
    const double denom = std::max(1.0, row_sum);
    for (std::size_t j = 0; j < v; ++j) topo.adjacency[i * v + j] /= denom;
  }
  return topo;
}

DemandTensor gen_traces(const LatentTopology& topology, std::size_t t_steps,
                        double base_load_mbps, std::uint64_t seed,
                        const TraceOptions& opt) {
  if (t_steps < 1) throw std::invalid_argument("gen_traces: need at least 1 step");
  if (base_load_mbps < 0.0)
    throw std::invalid_argument("gen_traces: base load must be >= 0");

  const std::size_t v = topology.size();
  DemandTensor tensor;
  tensor.channels = 1;
  tensor.steps = t_steps;
  tensor.nodes = v;
  tensor.values.assign(t_steps * v, 0.0);
  for (std::size_t i = 0; i < v; ++i)
    tensor.node_ids.push_back("n" + std::to_string(i));

  Rng rng(mix_seed(seed, 0x7EAC));
  std::vector<double> phase(v, 0.0);
  if (opt.random_phase)
    for (double& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);

  // Diffusion uses the self-loop-completed matrix (rows summing to exactly
  // 1), so a constant forcing level is a fixed point of the recursion.
  std::vector<double> self_loop(v, 0.0);
  for (std::size_t i = 0; i < v; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < v; ++j) row += topology.weight(i, j);
    self_loop[i] = 1.0 - row;
  }

  auto forcing = [&](std::size_t t, std::size_t i) {
    const double s = opt.amplitude *
                     std::sin(2.0 * std::numbers::pi *
                                  static_cast<double>(t % opt.period) /
                                  static_cast<double>(opt.period) +
                              phase[i]);
    const double n = opt.noise_std > 0.0 ? rng.normal(0.0, opt.noise_std) : 0.0;
    return std::max(0.0, base_load_mbps + s + n);
  };

  std::vector<double> x(v), next(v);
  for (std::size_t i = 0; i < v; ++i) x[i] = forcing(0, i);
  for (std::size_t i = 0; i < v; ++i) tensor.at(0, 0, i) = x[i];

  for (std::size_t t = 1; t < t_steps; ++t) {
    for (std::size_t i = 0; i < v; ++i) {
      double diffused = self_loop[i] * x[i];
      for (std::size_t j = 0; j < v; ++j) diffused += topology.weight(i, j) * x[j];
      next[i] = topology.rho * diffused + (1.0 - topology.rho) * forcing(t, i);
    }
    x = next;
    for (std::size_t i = 0; i < v; ++i) tensor.at(0, t, i) = x[i];
  }
  return tensor;
}

double slice_demand_bps(const DemandTensor& tensor, std::size_t t) {
  if (t >= tensor.steps)
    throw std::out_of_range("demand step " + std::to_string(t) + " out of range");
  double total_mbps = 0.0;
  for (std::size_t i = 0; i < tensor.nodes; ++i) total_mbps += tensor.at(0, t, i);
  return total_mbps * 1e6;
}

int slice_demand_aggregate(const DemandTensor& tensor, std::size_t t,
                           const radio::RadioConfig& cfg) {
  return std::max(1, radio::demand_to_rbs(slice_demand_bps(tensor, t), cfg));
}

void export_traces(const DemandTensor& tensor, const std::string& path) {
  tensor.validate();
  CsvWriter csv(path, {"t", "node-id", "demand"});
  for (std::size_t t = 0; t < tensor.steps; ++t)
    for (std::size_t i = 0; i < tensor.nodes; ++i)
      csv.write_row({std::to_string(t), tensor.node_ids[i],
                     format_double(tensor.at(0, t, i))});
}

DemandTensor import_traces(const std::string& path, const std::string& slice_id) {
  const std::vector<std::vector<std::string>> rows = read_csv(path);
  if (rows.empty() || rows[0] != std::vector<std::string>{"t", "node-id", "demand"})
    throw std::runtime_error("trace file " + path + " has unexpected header");

  std::map<std::string, std::size_t> node_index;
  std::size_t max_t = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3)
      throw std::runtime_error("trace file " + path + ": bad row " + std::to_string(r));
    node_index.emplace(rows[r][1], node_index.size());
    max_t = std::max(max_t, static_cast<std::size_t>(std::stoull(rows[r][0])));
  }

  DemandTensor tensor;
  tensor.slice_id = slice_id;
  tensor.steps = max_t + 1;
  tensor.nodes = node_index.size();
  tensor.values.assign(tensor.steps * tensor.nodes, 0.0);
  tensor.node_ids.resize(tensor.nodes);
  for (const auto& [id, idx] : node_index) tensor.node_ids[idx] = id;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t t = std::stoull(rows[r][0]);
    tensor.at(0, t, node_index.at(rows[r][1])) = parse_double(rows[r][2]);
  }
  tensor.validate();
  return tensor;
}

}  // namespace slicesim::traffic
