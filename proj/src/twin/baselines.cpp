#include "slicesim/twin/baselines.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slicesim/core/log.hpp"

namespace slicesim::twin {

double rmse(std::span<const ForecastRecord> records) {
  if (records.empty()) throw std::invalid_argument("rmse: no records");
  double acc = 0.0;
  for (const ForecastRecord& r : records) {
    const double e = r.actual - r.predicted;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(records.size()));
}

double forecast_persistence(std::span<const double> history) {
  if (history.empty()) throw std::invalid_argument("persistence: empty history");
  return history.back();
}

namespace {

std::vector<double> difference(std::span<const double> x, int d) {
  std::vector<double> w(x.begin(), x.end());
  for (int k = 0; k < d; ++k) {
    std::vector<double> next;
    for (std::size_t i = 1; i < w.size(); ++i) next.push_back(w[i] - w[i - 1]);
    w = std::move(next);
  }
  return w;
}

// Residuals of the fitted model on the differenced series, with zeros
// before enough lags exist.
std::vector<double> model_residuals(const std::vector<double>& w,
                                    const ArimaFit& fit) {
  const std::size_t start = static_cast<std::size_t>(std::max(fit.p, fit.q));
  std::vector<double> e(w.size(), 0.0);
  for (std::size_t t = start; t < w.size(); ++t) {
    double pred = fit.constant;
    for (int i = 0; i < fit.p; ++i) pred += fit.ar[i] * w[t - 1 - i];
    for (int j = 0; j < fit.q; ++j) pred += fit.ma[j] * e[t - 1 - j];
    e[t] = w[t] - pred;
  }
  return e;
}

bool ma_invertible(const std::vector<double>& ma) {
  int deg = static_cast<int>(ma.size());
  while (deg > 0 && std::abs(ma[deg - 1]) < 1e-12) --deg;
  if (deg == 0) return true;
  // Roots of 1 + ma_1 z + ... + ma_deg z^deg must lie outside the unit
  // circle; companion matrix of the monic reversal supplies them.
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  comp(0, deg - 1) = -1.0 / ma[deg - 1];
  for (int i = 0; i < deg - 1; ++i) comp(0, i) = -ma[deg - 2 - i] / ma[deg - 1];
  const auto roots = comp.eigenvalues();
  for (int i = 0; i < roots.size(); ++i)
    if (std::abs(roots[i]) <= 1.0 + 1e-9) return false;
  return true;
}

}  // namespace

ArimaFit fit_arima(std::span<const double> history, int p, int d, int q) {
  if (p < 0 || d < 0 || q < 0)
    throw std::invalid_argument("fit_arima: orders must be non-negative");
  if (static_cast<int>(history.size()) <= p + d + q + 10)
    throw std::invalid_argument("fit_arima: history too short for orders");

  ArimaFit fit;
  fit.p = p;
  fit.d = d;
  fit.q = q;
  fit.ar.assign(p, 0.0);
  fit.ma.assign(q, 0.0);

  const std::vector<double> w = difference(history, d);
  const int n = static_cast<int>(w.size());
  const bool with_const = d == 0;

  if (p == 0 && q == 0) {
    if (with_const)
      fit.constant = std::accumulate(w.begin(), w.end(), 0.0) / w.size();
    return fit;
  }

  // Stage 1: long AR by OLS, for residual estimates feeding the MA lags.
  std::vector<double> resid(w.size(), 0.0);
  int m = 0;
  if (q > 0) {
    m = std::min(std::max(p + q + 3, 10), n / 3);
    if (m < 1 || n - m < m + 2) {
      fit.fallback = true;
      return fit;
    }
    Eigen::MatrixXd xa(n - m, m + 1);
    Eigen::VectorXd ya(n - m);
    for (int t = m; t < n; ++t) {
      xa(t - m, 0) = 1.0;
      for (int i = 0; i < m; ++i) xa(t - m, 1 + i) = w[t - 1 - i];
      ya(t - m) = w[t];
    }
    Eigen::VectorXd beta = xa.colPivHouseholderQr().solve(ya);
    for (int t = m; t < n; ++t) {
      double pred = beta(0);
      for (int i = 0; i < m; ++i) pred += beta(1 + i) * w[t - 1 - i];
      resid[t] = w[t] - pred;
    }
  }

  // Stage 2: one OLS pass over AR lags and lagged residuals.
  const int start = std::max({p, q > 0 ? m + q : 0});
  const int rows = n - start;
  const int cols = (with_const ? 1 : 0) + p + q;
  if (rows < cols + 2) {
    fit.fallback = true;
    return fit;
  }
  Eigen::MatrixXd x(rows, cols);
  Eigen::VectorXd y(rows);
  for (int t = start; t < n; ++t) {
    int c = 0;
    if (with_const) x(t - start, c++) = 1.0;
    for (int i = 0; i < p; ++i) x(t - start, c++) = w[t - 1 - i];
    for (int j = 0; j < q; ++j) x(t - start, c++) = resid[t - 1 - j];
    y(t - start) = w[t];
  }
  Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  {
    int c = 0;
    if (with_const) fit.constant = beta(c++);
    for (int i = 0; i < p; ++i) fit.ar[i] = beta(c++);
    for (int j = 0; j < q; ++j) fit.ma[j] = beta(c++);
  }

  bool finite = std::isfinite(fit.constant);
  for (double v : fit.ar) finite = finite && std::isfinite(v);
  for (double v : fit.ma) finite = finite && std::isfinite(v);
  if (!finite || !ma_invertible(fit.ma)) {
    log_debug("arima(" + std::to_string(p) + "," + std::to_string(d) + "," +
              std::to_string(q) + ") fit not invertible, using persistence");
    fit = ArimaFit{};
    fit.p = p;
    fit.d = d;
    fit.q = q;
    fit.ar.assign(p, 0.0);
    fit.ma.assign(q, 0.0);
    fit.fallback = true;
  }
  return fit;
}

double ArimaFit::forecast(std::span<const double> history) const {
  if (history.empty()) throw std::invalid_argument("arima forecast: empty history");
  if (fallback) return history.back();

  const std::vector<double> w = difference(history, d);
  if (w.empty()) return history.back();
  const std::vector<double> e = model_residuals(w, *this);

  double next = constant;
  const int n = static_cast<int>(w.size());
  for (int i = 0; i < p; ++i)
    next += ar[i] * (n - 1 - i >= 0 ? w[n - 1 - i] : 0.0);
  for (int j = 0; j < q; ++j)
    next += ma[j] * (n - 1 - j >= 0 ? e[n - 1 - j] : 0.0);

  // Undifference: add back the top value of each difference level.
  double acc = next;
  for (int k = d; k >= 1; --k) {
    const std::vector<double> dk = difference(history, k - 1);
    acc += dk.back();
  }
  return d == 0 ? next : acc;
}

double forecast_arima(std::span<const double> history, int p, int d, int q) {
  return fit_arima(history, p, d, q).forecast(history);
}

void PersistenceForecaster::push(std::span<const double> node_demands_mbps) {
  aggregates_.push_back(
      std::accumulate(node_demands_mbps.begin(), node_demands_mbps.end(), 0.0));
}

double PersistenceForecaster::predict_next() {
  return forecast_persistence(aggregates_);
}

ArimaForecaster::ArimaForecaster(int p, int d, int q, std::size_t fit_window)
    : p_(p), d_(d), q_(q), fit_window_(fit_window) {}

void ArimaForecaster::push(std::span<const double> node_demands_mbps) {
  aggregates_.push_back(
      std::accumulate(node_demands_mbps.begin(), node_demands_mbps.end(), 0.0));
}

bool ArimaForecaster::ready() const {
  return static_cast<int>(aggregates_.size()) > p_ + d_ + q_ + 10;
}

double ArimaForecaster::predict_next() {
  if (aggregates_.empty())
    throw std::logic_error("arima forecaster: no history yet");
  if (!ready()) return aggregates_.back();
  const std::size_t n = aggregates_.size();
  const std::size_t len = std::min(fit_window_, n);
  std::span<const double> tail(aggregates_.data() + (n - len), len);
  ArimaFit fit = fit_arima(tail, p_, d_, q_);
  last_fallback_ = fit.fallback;
  return fit.forecast(tail);
}

TwinForecaster::TwinForecaster(const TwinConfig& cfg, std::uint64_t seed,
                               double demand_scale_mbps)
    : cfg_(cfg), model_(cfg, seed), scale_(demand_scale_mbps) {
  if (scale_ <= 0.0)
    throw std::invalid_argument("twin forecaster: demand scale must be > 0");
}

void TwinForecaster::push(std::span<const double> node_demands_mbps) {
  if (node_demands_mbps.size() != cfg_.nodes)
    throw std::invalid_argument("twin forecaster: expected one demand per node");
  history_.emplace_back(node_demands_mbps.begin(), node_demands_mbps.end());
}

bool TwinForecaster::ready() const { return history_.size() >= cfg_.window; }

std::vector<double> TwinForecaster::window_ending(std::size_t last) const {
  const std::size_t l = cfg_.window, v = cfg_.nodes;
  std::vector<double> window(v * l);
  for (std::size_t s = 0; s < l; ++s) {
    const std::vector<double>& step = history_[last + 1 - l + s];
    for (std::size_t z = 0; z < v; ++z) window[z * l + s] = step[z] / scale_;
  }
  return window;
}

double TwinForecaster::predict_next() {
  if (!ready()) throw std::logic_error("twin forecaster: window not filled yet");
  return model_.predict(window_ending(history_.size() - 1)) * scale_;
}

double TwinForecaster::train_latest() {
  if (history_.size() < cfg_.window + 1) return 0.0;
  const std::size_t last = history_.size() - 1;
  const double target =
      std::accumulate(history_[last].begin(), history_[last].end(), 0.0) / scale_;
  return model_.train_step(window_ending(last - 1), target) * scale_;
}

}  // namespace slicesim::twin
