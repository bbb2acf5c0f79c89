#pragma once

#include <cmath>
#include <stdexcept>

namespace slicesim::radio {

// Free-space-style loss, distance in meters and carrier in MHz.
inline double path_loss_db(double distance_m, double carrier_mhz) {
  if (distance_m <= 0.0 || carrier_mhz <= 0.0)
    throw std::invalid_argument("path_loss_db: inputs must be positive");
  return 20.0 * std::log10(distance_m) + 20.0 * std::log10(carrier_mhz) - 27.55;
}

// |h| from the loss plus the linear shadowing factor and fading power draw.
inline double channel_magnitude(double path_loss_db_v, double shadowing_lin,
                                double fading_power) {
  return std::pow(10.0, -path_loss_db_v / 20.0) *
         std::sqrt(shadowing_lin * fading_power);
}

inline double channel_gain(double path_loss_db_v, double shadowing_lin,
                           double fading_power) {
  const double m = channel_magnitude(path_loss_db_v, shadowing_lin, fading_power);
  return m * m;
}

// Shannon rate over bandwidth w with receive SNR p*|h|^2 / noise.
inline double achievable_rate_bps(double bandwidth_hz, double tx_power_w,
                                  double channel_gain_v, double noise_power_w) {
  if (bandwidth_hz <= 0.0) return 0.0;
  return bandwidth_hz * std::log2(1.0 + tx_power_w * channel_gain_v / noise_power_w);
}

// M/M/1 sojourn time with service rate r/packet_bits; a queue at or past
// saturation reports the cap instead of a divergent value.
inline double average_delay_s(double rate_bps, double lambda_pkts_s,
                              double packet_bits, double delay_cap_s) {
  const double mu = rate_bps / packet_bits;
  if (mu <= lambda_pkts_s) return delay_cap_s;
  return std::min(delay_cap_s, 1.0 / (mu - lambda_pkts_s));
}

}  // namespace slicesim::radio
