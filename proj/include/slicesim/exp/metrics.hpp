#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "slicesim/twin/baselines.hpp"

namespace slicesim::exp {

struct MetricsRow {
  std::uint64_t t = 0;
  std::string slice_id;
  std::string allocator_id;
  std::uint64_t seed = 0;
  double reward = 0.0;
  double critic_loss = 0.0;
  double omega = 0.0;
  double u_mean = 0.0;
  double rmse_so_far = 0.0;
  std::uint64_t comm_scalars = 0;
};

struct MetricsFrame {
  std::vector<MetricsRow> rows;

  void append(MetricsRow row) { rows.push_back(std::move(row)); }
  void extend(const MetricsFrame& other);
  bool operator==(const MetricsFrame& other) const;
};

const std::vector<std::string>& metrics_header();

void write_metrics_csv(const MetricsFrame& frame, const std::string& path);
MetricsFrame read_metrics_csv(const std::string& path);

// Per-allocator aggregates over seeds: each seed contributes its mean over
// the final window of the run (reward, omega, u_mean) or its last recorded
// value (rmse, comm scalars); the summary reports mean and std across seeds.
nlohmann::json summarize_metrics(const MetricsFrame& frame,
                                 double final_window_fraction = 0.1);

void write_summary_json(const MetricsFrame& frame, const std::string& path,
                        double final_window_fraction = 0.1);

// One-step forecast records tagged with the seed that produced them; feeds
// the forecast figure bundles.
struct SeededForecast {
  std::uint64_t seed = 0;
  twin::ForecastRecord record;
};

void write_forecasts_csv(const std::vector<SeededForecast>& records,
                         const std::string& path);
std::vector<SeededForecast> read_forecasts_csv(const std::string& path);

}  // namespace slicesim::exp
