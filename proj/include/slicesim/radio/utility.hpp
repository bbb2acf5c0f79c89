#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace slicesim::radio {

inline double rate_utility(double rate_bps, double r_min_bps, double phi) {
  return 1.0 / (1.0 + std::exp(-phi * (rate_bps - r_min_bps)));
}

inline double delay_utility(double delay_s, double tau_max_s, double phi) {
  return 1.0 / (1.0 + std::exp(-phi * (tau_max_s - delay_s)));
}

struct SliceUtility {
  double sum = 0.0;
  double mean = 0.0;
};

inline SliceUtility slice_utility(std::span<const double> device_utilities) {
  if (device_utilities.empty())
    throw std::invalid_argument("slice_utility: slice has no devices");
  SliceUtility u;
  for (double v : device_utilities) u.sum += v;
  u.mean = u.sum / static_cast<double>(device_utilities.size());
  return u;
}

// Grant w over demand phi, both in RBs. The raw ratio exceeds 1 when
// over-provisioned; the clipped form (fraction of the grant actually
// needed) is what the reward consumes. Zero demand yields 0 for both.
inline double utilization_raw(int w_rbs, int phi_rbs) {
  if (phi_rbs <= 0) return 0.0;
  return static_cast<double>(w_rbs) / static_cast<double>(phi_rbs);
}

inline double utilization_clipped(int w_rbs, int phi_rbs) {
  if (phi_rbs <= 0) return 0.0;
  if (w_rbs <= 0) return 0.0;
  return static_cast<double>(std::min(w_rbs, phi_rbs)) / static_cast<double>(w_rbs);
}

inline double reward(double omega_clipped, double mean_utility,
                     double lambda_weight, double mu_weight) {
  return lambda_weight * omega_clipped + mu_weight * mean_utility;
}

}  // namespace slicesim::radio
