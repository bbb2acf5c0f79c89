#include "slicesim/exp/plots.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "slicesim/core/csv.hpp"
#include "slicesim/core/log.hpp"

namespace slicesim::exp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string meta_string(const json& meta, const char* key,
                        const std::string& fallback) {
  if (meta.contains(key) && meta[key].is_string())
    return meta[key].get<std::string>();
  return fallback;
}

std::uint64_t meta_uint(const json& meta, const char* key,
                        std::uint64_t fallback) {
  if (meta.contains(key) && meta[key].is_number())
    return meta[key].get<std::uint64_t>();
  return fallback;
}

std::map<std::uint64_t, double> final_window_means(
    const MetricsFrame& frame, double fraction,
    double MetricsRow::*field) {
  std::map<std::uint64_t, std::vector<double>> by_seed;
  std::map<std::uint64_t, std::uint64_t> t_max;
  for (const MetricsRow& r : frame.rows) {
    t_max[r.seed] = std::max(t_max[r.seed], r.t);
  }
  for (const MetricsRow& r : frame.rows) {
    const auto start = static_cast<std::uint64_t>(
        std::floor((1.0 - fraction) * (t_max[r.seed] + 1)));
    if (r.t >= start) by_seed[r.seed].push_back(r.*field);
  }
  std::map<std::uint64_t, double> out;
  for (const auto& [seed, xs] : by_seed) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    out[seed] = xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
  }
  return out;
}

}  // namespace

PlotEmit emit_plot_files(const std::vector<RunBundle>& runs,
                         const std::string& out_dir,
                         double final_window_fraction) {
  PlotEmit emit;
  fs::create_directories(out_dir);

  // Forecast figures come from the first run with forecast records,
  // in sorted (allocator, devices) order for determinism.
  std::vector<const RunBundle*> ordered;
  for (const RunBundle& r : runs) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const RunBundle* a, const RunBundle* b) {
                     const auto ka = meta_string(a->meta, "allocator", "");
                     const auto kb = meta_string(b->meta, "allocator", "");
                     if (ka != kb) return ka < kb;
                     return meta_uint(a->meta, "devices", 0) <
                            meta_uint(b->meta, "devices", 0);
                   });

  const RunBundle* forecast_run = nullptr;
  for (const RunBundle* r : ordered) {
    if (!r->forecasts.empty()) {
      forecast_run = r;
      break;
    }
  }
  if (forecast_run == nullptr) {
    emit.warnings.push_back(
        "fig2a/fig2b: no run provides forecast records; skipped");
  } else {
    std::uint64_t first_seed = forecast_run->forecasts[0].seed;
    for (const SeededForecast& f : forecast_run->forecasts)
      first_seed = std::min(first_seed, f.seed);

    std::vector<const SeededForecast*> trace;
    for (const SeededForecast& f : forecast_run->forecasts) {
      if (f.seed == first_seed) trace.push_back(&f);
    }
    std::stable_sort(trace.begin(), trace.end(),
                     [](const SeededForecast* a, const SeededForecast* b) {
                       if (a->record.model_id != b->record.model_id)
                         return a->record.model_id < b->record.model_id;
                       return a->record.t < b->record.t;
                     });
    {
      const std::string path = out_dir + "/fig2a.csv";
      CsvWriter out(path, {"t", "model_id", "actual", "predicted"});
      for (const SeededForecast* f : trace) {
        out.write_row({std::to_string(f->record.t), f->record.model_id,
                       format_double(f->record.actual),
                       format_double(f->record.predicted)});
      }
      emit.written.push_back(path);
    }
    {
      std::map<std::pair<std::string, std::uint64_t>,
               std::pair<double, std::size_t>>
          acc;
      for (const SeededForecast& f : forecast_run->forecasts) {
        auto& [sq, n] = acc[{f.record.model_id, f.seed}];
        const double err = f.record.predicted - f.record.actual;
        sq += err * err;
        ++n;
      }
      const std::string path = out_dir + "/fig2b.csv";
      CsvWriter out(path, {"model_id", "seed", "rmse"});
      for (const auto& [key, val] : acc) {
        out.write_row({key.first, std::to_string(key.second),
                       format_double(std::sqrt(
                           val.first / static_cast<double>(val.second)))});
      }
      emit.written.push_back(path);
    }
  }

  if (runs.empty()) {
    emit.warnings.push_back("fig3: no runs found; skipped");
    emit.warnings.push_back("fig4: no runs found; skipped");
    return emit;
  }

  {
    // Convergence curves: per-step reward and loss averaged over slices.
    const std::string path = out_dir + "/fig3.csv";
    CsvWriter out(path,
                  {"t", "series_id", "devices", "seed", "reward",
                   "critic_loss"});
    for (const RunBundle* r : ordered) {
      const std::string series = meta_string(r->meta, "allocator", "unknown");
      const std::uint64_t devices = meta_uint(r->meta, "devices", 0);
      std::map<std::pair<std::uint64_t, std::uint64_t>,
               std::pair<std::vector<double>, std::vector<double>>>
          by_seed_t;
      for (const MetricsRow& row : r->frame.rows) {
        auto& [rs, ls] = by_seed_t[{row.seed, row.t}];
        rs.push_back(row.reward);
        ls.push_back(row.critic_loss);
      }
      for (const auto& [key, val] : by_seed_t) {
        double r_mean = 0.0, l_mean = 0.0;
        for (double x : val.first) r_mean += x;
        for (double x : val.second) l_mean += x;
        r_mean /= static_cast<double>(val.first.size());
        l_mean /= static_cast<double>(val.second.size());
        out.write_row({std::to_string(key.second), series,
                       std::to_string(devices), std::to_string(key.first),
                       format_double(r_mean), format_double(l_mean)});
      }
    }
    emit.written.push_back(path);
  }

  {
    // Device-count sweep: final-window utilization and QoS per run.
    const std::set<std::string> allocators_present = [&] {
      std::set<std::string> s;
      for (const RunBundle* r : ordered)
        s.insert(meta_string(r->meta, "allocator", "unknown"));
      return s;
    }();
    std::set<std::uint64_t> device_counts;
    for (const RunBundle* r : ordered)
      device_counts.insert(meta_uint(r->meta, "devices", 0));
    std::set<std::pair<std::string, std::uint64_t>> present;
    for (const RunBundle* r : ordered)
      present.insert({meta_string(r->meta, "allocator", "unknown"),
                      meta_uint(r->meta, "devices", 0)});
    for (const std::string& a : allocators_present) {
      for (std::uint64_t d : device_counts) {
        if (present.count({a, d}) == 0) {
          emit.warnings.push_back("fig4: missing series " + a +
                                  " at devices=" + std::to_string(d));
        }
      }
    }

    const std::string path = out_dir + "/fig4.csv";
    CsvWriter out(path, {"devices", "series_id", "seed", "omega", "u_mean"});
    for (const RunBundle* r : ordered) {
      const std::string series = meta_string(r->meta, "allocator", "unknown");
      const std::uint64_t devices = meta_uint(r->meta, "devices", 0);
      const auto omega = final_window_means(r->frame, final_window_fraction,
                                            &MetricsRow::omega);
      const auto qos = final_window_means(r->frame, final_window_fraction,
                                          &MetricsRow::u_mean);
      for (const auto& [seed, o] : omega) {
        out.write_row({std::to_string(devices), series, std::to_string(seed),
                       format_double(o), format_double(qos.at(seed))});
      }
    }
    emit.written.push_back(path);
  }

  return emit;
}

PlotEmit emit_plot_data(const std::string& runs_dir,
                        const std::string& out_dir) {
  std::vector<RunBundle> runs;
  std::vector<std::string> run_dirs;
  const fs::path root(runs_dir);
  if (fs::exists(root / "meta.json")) run_dirs.push_back(root.string());
  if (fs::is_directory(root)) {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / "meta.json"))
        run_dirs.push_back(entry.path().string());
    }
  }
  std::sort(run_dirs.begin(), run_dirs.end());

  PlotEmit emit;
  for (const std::string& dir : run_dirs) {
    RunBundle bundle;
    std::ifstream meta(dir + "/meta.json");
    try {
      meta >> bundle.meta;
    } catch (const json::parse_error& e) {
      emit.warnings.push_back(dir + "/meta.json: unreadable, run skipped");
      continue;
    }
    const std::string metrics_path = dir + "/metrics.csv";
    if (fs::exists(metrics_path)) {
      bundle.frame = read_metrics_csv(metrics_path);
    } else {
      emit.warnings.push_back(metrics_path + ": missing, run skipped");
      continue;
    }
    const std::string forecasts_path = dir + "/forecasts.csv";
    if (fs::exists(forecasts_path))
      bundle.forecasts = read_forecasts_csv(forecasts_path);
    runs.push_back(std::move(bundle));
  }

  PlotEmit files = emit_plot_files(runs, out_dir);
  files.warnings.insert(files.warnings.begin(), emit.warnings.begin(),
                        emit.warnings.end());
  for (const std::string& w : files.warnings) log_info("plots: " + w);
  return files;
}

}  // namespace slicesim::exp
