#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slicesim/radio/types.hpp"

namespace slicesim::radio {

struct SliceStep {
  int w_rbs = 0;
  int phi_rbs = 0;
  double omega_raw = 0.0;
  double omega_clipped = 0.0;
  double utility_sum = 0.0;
  double utility_mean = 0.0;
  double reward = 0.0;
  std::vector<double> device_rates_bps;
  std::vector<double> device_delays_s;
};

struct StepResult {
  std::vector<SliceStep> slices;
};

// Single-BS downlink environment. Device placement and shadowing are drawn
// once per episode; fading is redrawn every TTI from a stream keyed by
// (seed, t), so a step's draws do not depend on how many steps ran before.
class Environment {
 public:
  Environment(RadioConfig cfg, std::vector<SliceSpec> slices, std::uint64_t seed);

  const RadioConfig& config() const { return cfg_; }
  const std::vector<SliceSpec>& slices() const { return slices_; }
  const std::vector<std::vector<DeviceState>>& devices() const { return devices_; }

  AllocationState initial_allocation() const;

  // demand_bps holds one aggregate demand per slice for this TTI.
  StepResult step(std::uint64_t t, const AllocationState& allocation,
                  std::span<const double> demand_bps);

 private:
  RadioConfig cfg_;
  std::vector<SliceSpec> slices_;
  std::vector<std::vector<DeviceState>> devices_;
  std::uint64_t seed_;
};

}  // namespace slicesim::radio
