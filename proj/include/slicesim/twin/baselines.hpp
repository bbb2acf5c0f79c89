#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "slicesim/twin/model.hpp"

namespace slicesim::twin {

struct ForecastRecord {
  std::uint64_t t = 0;
  double actual = 0.0;
  double predicted = 0.0;
  std::string model_id;
};

double rmse(std::span<const ForecastRecord> records);

// Last observed value; the floor every learned model has to beat.
double forecast_persistence(std::span<const double> history);

struct ArimaFit {
  int p = 0, d = 0, q = 0;
  std::vector<double> ar;
  std::vector<double> ma;
  double constant = 0.0;
  bool fallback = false;  // non-invertible fit, persistence used instead

  double forecast(std::span<const double> history) const;
};

// Hannan-Rissanen conditional least squares: a long AR fit supplies
// residual estimates, then one OLS pass over AR and MA lags. The constant
// is only fitted for undifferenced models.
ArimaFit fit_arima(std::span<const double> history, int p, int d, int q);

double forecast_arima(std::span<const double> history, int p, int d, int q);

// Streaming per-slice forecaster interface shared by the twin and the
// baselines: push one step of node-level demand, then ask for the next
// aggregate (Mb/s).
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual const char* id() const = 0;
  virtual void push(std::span<const double> node_demands_mbps) = 0;
  virtual bool ready() const = 0;
  virtual double predict_next() = 0;
  virtual double train_latest() { return 0.0; }
};

class PersistenceForecaster final : public Forecaster {
 public:
  const char* id() const override { return "persistence"; }
  void push(std::span<const double> node_demands_mbps) override;
  bool ready() const override { return !aggregates_.empty(); }
  double predict_next() override;

 private:
  std::vector<double> aggregates_;
};

class ArimaForecaster final : public Forecaster {
 public:
  ArimaForecaster(int p, int d, int q, std::size_t fit_window = 200);
  const char* id() const override { return "arima"; }
  void push(std::span<const double> node_demands_mbps) override;
  bool ready() const override;
  double predict_next() override;
  bool last_fallback() const { return last_fallback_; }

 private:
  int p_, d_, q_;
  std::size_t fit_window_;
  std::vector<double> aggregates_;
  bool last_fallback_ = false;
};

class TwinForecaster final : public Forecaster {
 public:
  TwinForecaster(const TwinConfig& cfg, std::uint64_t seed, double demand_scale_mbps);
  const char* id() const override { return "twin"; }
  void push(std::span<const double> node_demands_mbps) override;
  bool ready() const override;
  double predict_next() override;
  double train_latest() override;

  TwinModel& model() { return model_; }
  const TwinModel& model() const { return model_; }
  double demand_scale() const { return scale_; }

 private:
  TwinConfig cfg_;
  TwinModel model_;
  double scale_;
  std::vector<std::vector<double>> history_;  // node demands per step

  std::vector<double> window_ending(std::size_t last) const;
};

}  // namespace slicesim::twin
