#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/radio/types.hpp"

namespace slicesim::traffic {

// Z channels x T steps x V nodes of demand in Mb/s, flattened with the
// node index fastest.
struct DemandTensor {
  std::size_t channels = 1;
  std::size_t steps = 0;
  std::size_t nodes = 0;
  std::vector<double> values;
  std::vector<std::string> node_ids;
  std::string slice_id;

  double& at(std::size_t z, std::size_t t, std::size_t v) {
    return values[(z * steps + t) * nodes + v];
  }
  double at(std::size_t z, std::size_t t, std::size_t v) const {
    return values[(z * steps + t) * nodes + v];
  }
  void validate() const;
};

// Ground-truth spatial structure the twin should partially recover. Row
// sums stay <= 1 so diffusion with rho < 1 cannot diverge.
struct LatentTopology {
  std::vector<double> x_m, y_m;
  std::vector<double> adjacency;  // V x V, row-major, zero diagonal
  double rho = 0.6;

  std::size_t size() const { return x_m.size(); }
  double weight(std::size_t i, std::size_t j) const {
    return adjacency[i * size() + j];
  }
};

struct TopologyOptions {
  double scale_m = 150.0;
  double cell_radius_m = 500.0;
  double rho = 0.6;
};

struct TraceOptions {
  double amplitude = 0.0;
  double noise_std = 0.0;
  std::size_t period = 288;
  bool random_phase = true;
};

LatentTopology gen_topology(std::size_t v, std::uint64_t seed,
                            const TopologyOptions& opt = {});

DemandTensor gen_traces(const LatentTopology& topology, std::size_t t_steps,
                        double base_load_mbps, std::uint64_t seed,
                        const TraceOptions& opt = {});

// Sums all node demand at step t and converts Mb/s to whole RBs at the
// planning spectral efficiency; never below 1 RB.
int slice_demand_aggregate(const DemandTensor& tensor, std::size_t t,
                           const radio::RadioConfig& cfg);

// Aggregate demand at step t in bits/s (no RB rounding).
double slice_demand_bps(const DemandTensor& tensor, std::size_t t);

void export_traces(const DemandTensor& tensor, const std::string& path);
DemandTensor import_traces(const std::string& path, const std::string& slice_id);

}  // namespace slicesim::traffic
