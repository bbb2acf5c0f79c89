#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "slicesim/alloc/baselines.hpp"
#include "slicesim/marl/ddpg.hpp"
#include "slicesim/radio/types.hpp"
#include "slicesim/traffic/traffic.hpp"
#include "slicesim/twin/model.hpp"

namespace slicesim::exp {

// A scenario file failed schema validation; messages carry JSON paths.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct SliceScenario {
  std::string id;
  std::string kind = "rate";  // "rate" | "delay"
  double r_min_mbps = 0.5;
  double tau_max_ms = 20.0;
  double phi = 5.0;  // sigmoid steepness per Mb/s (rate) or per ms (delay)
  std::size_t device_count = 20;
  double lambda_pkts_s = 50.0;
  double packet_bits = 4096.0;
  double load_scale = 1.0;  // multiplies traffic.base_load_mbps for this slice
};

struct TrafficParams {
  double base_load_mbps = 0.15;
  double amplitude = 0.3;
  double noise_std = 0.05;
  std::size_t period = 24;
  bool random_phase = true;
  double rho = 0.6;
  double scale_m = 150.0;
};

struct TwinParams {
  std::size_t window = 12;
  std::size_t conv_kernel = 5;
  std::size_t conv_hidden = 8;
  std::size_t features = 16;
  std::size_t embed = 16;
  std::size_t graph_dim = 16;
  std::size_t attn_dim = 16;
  std::size_t out_dim = 16;
  std::size_t head_hidden = 16;
  double beta = 1.0;
  double learning_rate = 3e-3;
  std::string optimizer = "adam";
  double demand_scale_mbps = 0.4;
  bool federate = false;
};

struct AgentParams {
  std::size_t hidden = 64;
  std::size_t hidden_layers = 2;
  double gamma = 0.95;
  double nu = 0.01;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";
  double delta_fraction = 0.1;
  std::size_t replay_capacity = 1000;
  std::size_t batch = 64;
};

struct Scenario {
  std::string name;
  radio::RadioConfig radio;
  std::vector<SliceScenario> slices;
  TrafficParams traffic;
  TwinParams twin;
  AgentParams agent;
  std::string allocator = "dt-mafl";
  std::uint64_t agg_tau = 50;
  std::uint64_t steps = 1000;
  std::vector<std::uint64_t> seeds;
  double demand_norm_mbps = 36.0;
};

// Structural validation mirroring docs/scenario.schema.json. Returns one
// "<json-path>: <message>" line per violation; empty means valid.
std::vector<std::string> validate_scenario_json(const nlohmann::json& j);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

// Parses and validates; throws ScenarioError listing every violation.
Scenario load_scenario(const std::string& path);

// Sweep helper: the same scenario with every slice at a new device count.
Scenario with_device_count(Scenario s, std::size_t devices);

radio::SliceSpec to_slice_spec(const SliceScenario& s);
twin::TwinConfig to_twin_config(const TwinParams& p, std::size_t nodes);
marl::DdpgConfig to_ddpg_config(const AgentParams& p);
alloc::DqnConfig to_dqn_config(const AgentParams& p);

}  // namespace slicesim::exp
