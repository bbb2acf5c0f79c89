#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "slicesim/exp/metrics.hpp"

namespace slicesim::exp {

// One exported run: its meta record plus the loaded artifacts.
struct RunBundle {
  nlohmann::json meta;
  MetricsFrame frame;
  std::vector<SeededForecast> forecasts;
};

struct PlotEmit {
  std::vector<std::string> written;
  std::vector<std::string> warnings;
};

// Tidy per-figure CSVs from in-memory bundles:
//   fig2a.csv  {t, model_id, actual, predicted}       forecast traces
//   fig2b.csv  {model_id, seed, rmse}                 forecast accuracy
//   fig3.csv   {t, series_id, devices, seed, reward, critic_loss}
//   fig4.csv   {devices, series_id, seed, omega, u_mean}
// Missing series are listed as warnings and the rest is still emitted.
PlotEmit emit_plot_files(const std::vector<RunBundle>& runs,
                         const std::string& out_dir,
                         double final_window_fraction = 0.1);

// Scans runs_dir for exported runs (directories holding meta.json) and
// writes the figure bundles under out_dir.
PlotEmit emit_plot_data(const std::string& runs_dir,
                        const std::string& out_dir);

}  // namespace slicesim::exp
