#include "slicesim/exp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "slicesim/core/csv.hpp"

namespace slicesim::exp {

namespace {

using nlohmann::json;

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  for (double x : xs) out.std += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(out.std / static_cast<double>(xs.size()));
  return out;
}

json to_json(const MeanStd& m) {
  return json{{"mean", m.mean}, {"std", m.std}};
}

}  // namespace

void MetricsFrame::extend(const MetricsFrame& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

bool MetricsFrame::operator==(const MetricsFrame& other) const {
  if (rows.size() != other.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MetricsRow& a = rows[i];
    const MetricsRow& b = other.rows[i];
    if (a.t != b.t || a.slice_id != b.slice_id ||
        a.allocator_id != b.allocator_id || a.seed != b.seed ||
        a.reward != b.reward || a.critic_loss != b.critic_loss ||
        a.omega != b.omega || a.u_mean != b.u_mean ||
        a.rmse_so_far != b.rmse_so_far || a.comm_scalars != b.comm_scalars)
      return false;
  }
  return true;
}

const std::vector<std::string>& metrics_header() {
  static const std::vector<std::string> header{
      "t",      "slice_id", "allocator_id", "seed",         "reward",
      "critic_loss", "omega",    "u_mean",       "rmse_so_far", "comm_scalars"};
  return header;
}

void write_metrics_csv(const MetricsFrame& frame, const std::string& path) {
  CsvWriter out(path, metrics_header());
  for (const MetricsRow& r : frame.rows) {
    out.write_row({std::to_string(r.t), r.slice_id, r.allocator_id,
                   std::to_string(r.seed), format_double(r.reward),
                   format_double(r.critic_loss), format_double(r.omega),
                   format_double(r.u_mean), format_double(r.rmse_so_far),
                   std::to_string(r.comm_scalars)});
  }
}

MetricsFrame read_metrics_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.empty() || rows[0] != metrics_header())
    throw std::runtime_error("metrics csv has an unexpected header: " + path);
  MetricsFrame frame;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != metrics_header().size())
      throw std::runtime_error("metrics csv row has wrong arity: " + path);
    MetricsRow r;
    r.t = std::stoull(f[0]);
    r.slice_id = f[1];
    r.allocator_id = f[2];
    r.seed = std::stoull(f[3]);
    r.reward = parse_double(f[4]);
    r.critic_loss = parse_double(f[5]);
    r.omega = parse_double(f[6]);
    r.u_mean = parse_double(f[7]);
    r.rmse_so_far = parse_double(f[8]);
    r.comm_scalars = std::stoull(f[9]);
    frame.append(std::move(r));
  }
  return frame;
}

json summarize_metrics(const MetricsFrame& frame,
                       double final_window_fraction) {
  json out;
  out["rows"] = frame.rows.size();
  out["final_window_fraction"] = final_window_fraction;
  if (frame.rows.empty()) {
    out["allocators"] = nullptr;
    return out;
  }

  // allocator -> seed -> rows, preserving append order within each run.
  std::map<std::string, std::map<std::uint64_t, std::vector<const MetricsRow*>>>
      groups;
  for (const MetricsRow& r : frame.rows)
    groups[r.allocator_id][r.seed].push_back(&r);

  json allocs = json::object();
  for (const auto& [allocator, by_seed] : groups) {
    std::vector<double> reward, omega, u_mean, rmse, comm;
    for (const auto& [seed, rows] : by_seed) {
      std::uint64_t t_max = 0;
      for (const MetricsRow* r : rows) t_max = std::max(t_max, r->t);
      const auto window_start = static_cast<std::uint64_t>(
          std::floor((1.0 - final_window_fraction) * (t_max + 1)));
      double r_sum = 0.0, o_sum = 0.0, u_sum = 0.0;
      std::size_t n = 0;
      for (const MetricsRow* r : rows) {
        if (r->t < window_start) continue;
        r_sum += r->reward;
        o_sum += r->omega;
        u_sum += r->u_mean;
        ++n;
      }
      if (n > 0) {
        reward.push_back(r_sum / n);
        omega.push_back(o_sum / n);
        u_mean.push_back(u_sum / n);
      }
      rmse.push_back(rows.back()->rmse_so_far);
      comm.push_back(static_cast<double>(rows.back()->comm_scalars));
    }
    allocs[allocator] = {{"seeds", by_seed.size()},
                         {"reward", to_json(mean_std(reward))},
                         {"omega", to_json(mean_std(omega))},
                         {"u_mean", to_json(mean_std(u_mean))},
                         {"rmse", to_json(mean_std(rmse))},
                         {"comm_scalars", to_json(mean_std(comm))}};
  }
  out["allocators"] = std::move(allocs);
  return out;
}

void write_summary_json(const MetricsFrame& frame, const std::string& path,
                        double final_window_fraction) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << summarize_metrics(frame, final_window_fraction).dump(2) << '\n';
}

void write_forecasts_csv(const std::vector<SeededForecast>& records,
                         const std::string& path) {
  CsvWriter out(path, {"t", "model_id", "seed", "actual", "predicted"});
  for (const SeededForecast& f : records) {
    out.write_row({std::to_string(f.record.t), f.record.model_id,
                   std::to_string(f.seed), format_double(f.record.actual),
                   format_double(f.record.predicted)});
  }
}

std::vector<SeededForecast> read_forecasts_csv(const std::string& path) {
  const auto rows = read_csv(path);
  const std::vector<std::string> header{"t", "model_id", "seed", "actual",
                                        "predicted"};
  if (rows.empty() || rows[0] != header)
    throw std::runtime_error("forecast csv has an unexpected header: " + path);
  std::vector<SeededForecast> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != header.size())
      throw std::runtime_error("forecast csv row has wrong arity: " + path);
    SeededForecast rec;
    rec.record.t = std::stoull(f[0]);
    rec.record.model_id = f[1];
    rec.seed = std::stoull(f[2]);
    rec.record.actual = parse_double(f[3]);
    rec.record.predicted = parse_double(f[4]);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace slicesim::exp
