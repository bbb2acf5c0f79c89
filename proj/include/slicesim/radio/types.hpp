#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace slicesim::radio {

enum class SliceKind { RateConstrained, DelayConstrained };

const char* slice_kind_name(SliceKind kind);

// One network slice and its QoS contract. r_min applies to the rate kind,
// tau_max to the delay kind; phi is the sigmoid steepness of the utility.
struct SliceSpec {
  std::string id;
  SliceKind kind = SliceKind::RateConstrained;
  double r_min_bps = 0.0;
  double tau_max_s = 0.0;
  double phi = 1.0;
  std::size_t device_count = 1;
  double lambda_pkts_s = 1.0;
  double packet_bits = 4096.0;

  void validate() const;
};

struct DeviceState {
  double x_m = 0.0;
  double y_m = 0.0;
  double distance_m = 1.0;
  double shadowing_db = 0.0;
  double fading_power = 1.0;
  double bandwidth_hz = 0.0;
  double rate_bps = 0.0;
  double delay_s = 0.0;
};

// Integer RB grants per slice drawn from one shared pool.
struct AllocationState {
  std::vector<int> rbs;
  int kappa = 0;
  int total_rbs = 0;

  bool feasible() const;
  void validate() const;
};

struct RadioConfig {
  double carrier_mhz = 2000.0;
  double cell_radius_m = 500.0;
  int total_rbs = 50;
  double rb_bandwidth_hz = 180e3;
  double tx_power_dbm = 30.0;
  double noise_density_dbm_hz = -174.0;
  double shadowing_std_db = 8.0;
  double lambda_weight = 0.5;
  double mu_weight = 0.5;
  double delay_cap_s = 10.0;
  double reference_spectral_efficiency = 4.0;
  // Recorded for completeness; a single-cell model has no interferer.
  double interference_threshold_dbm = -101.2;
  int kappa = 0;  // per-slice RB cap; 0 means the pool size

  int slice_cap() const { return kappa > 0 ? kappa : total_rbs; }
  void validate() const;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// RBs needed to carry demand at the planning spectral efficiency; zero
// demand maps to zero RBs.
int demand_to_rbs(double demand_bps, const RadioConfig& cfg);

}  // namespace slicesim::radio
