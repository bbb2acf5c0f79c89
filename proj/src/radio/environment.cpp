#include "slicesim/radio/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "slicesim/core/rng.hpp"
#include "slicesim/radio/channel.hpp"
#include "slicesim/radio/utility.hpp"

namespace slicesim::radio {

namespace {
enum Stream : std::uint64_t { kPlacement = 0, kFading = 1 };
}

Environment::Environment(RadioConfig cfg, std::vector<SliceSpec> slices,
                         std::uint64_t seed)
    : cfg_(std::move(cfg)), slices_(std::move(slices)), seed_(seed) {
  cfg_.validate();
  if (slices_.empty()) throw std::invalid_argument("environment needs slices");
  for (const SliceSpec& s : slices_) s.validate();
  if (static_cast<long long>(slices_.size()) > cfg_.total_rbs)
    throw std::invalid_argument("more slices than RBs in the pool");

  Rng rng(mix_seed(seed_, kPlacement));
  devices_.resize(slices_.size());
  for (std::size_t m = 0; m < slices_.size(); ++m) {
    devices_[m].resize(slices_[m].device_count);
    for (DeviceState& dev : devices_[m]) {
      const double d = std::max(1.0, std::sqrt(rng.uniform01()) * cfg_.cell_radius_m);
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      dev.distance_m = d;
      dev.x_m = d * std::cos(angle);
      dev.y_m = d * std::sin(angle);
      dev.shadowing_db = rng.normal(0.0, cfg_.shadowing_std_db);
    }
  }
}

AllocationState Environment::initial_allocation() const {
  AllocationState alloc;
  alloc.kappa = cfg_.slice_cap();
  alloc.total_rbs = cfg_.total_rbs;
  const int m = static_cast<int>(slices_.size());
  const int base = cfg_.total_rbs / m;
  int remainder = cfg_.total_rbs % m;
  for (int i = 0; i < m; ++i) {
    int w = base + (i < remainder ? 1 : 0);
    alloc.rbs.push_back(std::clamp(w, 1, alloc.kappa));
  }
  alloc.validate();
  return alloc;
}

StepResult Environment::step(std::uint64_t t, const AllocationState& allocation,
                             std::span<const double> demand_bps) {
  allocation.validate();
  if (allocation.rbs.size() != slices_.size())
    throw std::invalid_argument("allocation has wrong slice count");
  if (demand_bps.size() != slices_.size())
    throw std::invalid_argument("demand missing for step " + std::to_string(t));

  Rng fading(mix_seed(mix_seed(seed_, kFading), t));
  const double p_total_w = dbm_to_watts(cfg_.tx_power_dbm);
  const double pool_hz = cfg_.total_rbs * cfg_.rb_bandwidth_hz;
  const double n0_w = dbm_to_watts(cfg_.noise_density_dbm_hz);

  StepResult result;
  result.slices.resize(slices_.size());
  for (std::size_t m = 0; m < slices_.size(); ++m) {
    const SliceSpec& spec = slices_[m];
    SliceStep& out = result.slices[m];
    out.w_rbs = allocation.rbs[m];
    out.phi_rbs = demand_to_rbs(demand_bps[m], cfg_);

    const double slice_hz = out.w_rbs * cfg_.rb_bandwidth_hz;
    const double dev_hz = slice_hz / static_cast<double>(spec.device_count);
    const double dev_p_w = p_total_w * dev_hz / pool_hz;
    const double dev_noise_w = n0_w * dev_hz;

    std::vector<double> utilities;
    for (DeviceState& dev : devices_[m]) {
      dev.fading_power = fading.exponential(1.0);
      dev.bandwidth_hz = dev_hz;
      const double pl = path_loss_db(dev.distance_m, cfg_.carrier_mhz);
      const double gain = channel_gain(pl, db_to_linear(dev.shadowing_db),
                                       dev.fading_power);
      dev.rate_bps = achievable_rate_bps(dev_hz, dev_p_w, gain, dev_noise_w);
      dev.delay_s = average_delay_s(dev.rate_bps, spec.lambda_pkts_s,
                                    spec.packet_bits, cfg_.delay_cap_s);
      out.device_rates_bps.push_back(dev.rate_bps);
      out.device_delays_s.push_back(dev.delay_s);
      if (out.phi_rbs > 0)
        utilities.push_back(spec.kind == SliceKind::RateConstrained
                                ? rate_utility(dev.rate_bps, spec.r_min_bps, spec.phi)
                                : delay_utility(dev.delay_s, spec.tau_max_s, spec.phi));
    }

    if (utilities.empty()) {
      // Idle slice: nothing to satisfy, so the utility term is vacuously
      // full while the sum and utilization stay zero.
      out.utility_sum = 0.0;
      out.utility_mean = 1.0;
    } else {
      const SliceUtility u = slice_utility(utilities);
      out.utility_sum = u.sum;
      out.utility_mean = u.mean;
    }
    out.omega_raw = utilization_raw(out.w_rbs, out.phi_rbs);
    out.omega_clipped = utilization_clipped(out.w_rbs, out.phi_rbs);
    out.reward = reward(out.omega_clipped, out.utility_mean, cfg_.lambda_weight,
                        cfg_.mu_weight);
  }
  return result;
}

}  // namespace slicesim::radio
