#include "slicesim/radio/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slicesim::radio {

const char* slice_kind_name(SliceKind kind) {
  return kind == SliceKind::RateConstrained ? "rate" : "delay";
}

void SliceSpec::validate() const {
  if (id.empty()) throw std::invalid_argument("slice id must be non-empty");
  if (kind == SliceKind::RateConstrained) {
    if (r_min_bps <= 0.0)
      throw std::invalid_argument("slice " + id + ": rate kind needs r_min > 0");
    if (tau_max_s != 0.0)
      throw std::invalid_argument("slice " + id + ": rate kind must not set tau_max");
  } else {
    if (tau_max_s <= 0.0)
      throw std::invalid_argument("slice " + id + ": delay kind needs tau_max > 0");
    if (r_min_bps != 0.0)
      throw std::invalid_argument("slice " + id + ": delay kind must not set r_min");
  }
  if (phi <= 0.0) throw std::invalid_argument("slice " + id + ": phi must be > 0");
  if (device_count < 1)
    throw std::invalid_argument("slice " + id + ": device count must be >= 1");
  if (lambda_pkts_s <= 0.0)
    throw std::invalid_argument("slice " + id + ": lambda must be > 0");
  if (packet_bits <= 0.0)
    throw std::invalid_argument("slice " + id + ": packet size must be > 0");
}

bool AllocationState::feasible() const {
  long long sum = 0;
  for (int w : rbs) {
    if (w < 1 || w > kappa) return false;
    sum += w;
  }
  return sum <= total_rbs;
}

void AllocationState::validate() const {
  if (rbs.empty()) throw std::invalid_argument("allocation has no slices");
  if (kappa < 1 || total_rbs < 1)
    throw std::invalid_argument("allocation caps must be positive");
  if (!feasible()) throw std::invalid_argument("allocation violates RB constraints");
}

void RadioConfig::validate() const {
  if (carrier_mhz <= 0.0 || cell_radius_m <= 0.0 || total_rbs < 1 ||
      rb_bandwidth_hz <= 0.0 || shadowing_std_db < 0.0 || delay_cap_s <= 0.0 ||
      reference_spectral_efficiency <= 0.0)
    throw std::invalid_argument("radio config fields must be positive");
  if (lambda_weight < 0.0 || mu_weight < 0.0)
    throw std::invalid_argument("reward weights must be non-negative");
  if (kappa < 0 || kappa > total_rbs)
    throw std::invalid_argument("kappa must lie in [0, total_rbs]");
}

int demand_to_rbs(double demand_bps, const RadioConfig& cfg) {
  if (demand_bps <= 0.0) return 0;
  const double per_rb = cfg.rb_bandwidth_hz * cfg.reference_spectral_efficiency;
  const double rbs = std::ceil(demand_bps / per_rb - 1e-9);
  return std::max(1, static_cast<int>(rbs));
}

}  // namespace slicesim::radio
