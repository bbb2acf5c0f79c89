#include "slicesim/nn/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "slicesim/core/rng.hpp"
#include "slicesim/kernels/kernels.hpp"

namespace slicesim::nn {

namespace {
constexpr std::size_t kNoEntry = static_cast<std::size_t>(-1);

[[noreturn]] void shape_error(std::size_t layer_index, LayerKind kind,
                              const std::string& detail) {
  throw std::invalid_argument("layer " + std::to_string(layer_index) + " (" +
                              layer_kind_name(kind) + "): " + detail);
}
}  // namespace

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv1d: return "conv1d";
    case LayerKind::Relu: return "relu";
    case LayerKind::Tanh: return "tanh";
    case LayerKind::LeakyRelu: return "leaky-relu";
    case LayerKind::Sigmoid: return "sigmoid";
    case LayerKind::Softmax: return "softmax";
  }
  return "?";
}

void LayerSpec::validate(std::size_t layer_index) const {
  switch (kind) {
    case LayerKind::Dense:
      if (in_dim == 0 || out_dim == 0)
        shape_error(layer_index, kind, "dims must be positive");
      break;
    case LayerKind::Conv1d:
      if (in_dim == 0 || out_dim == 0)
        shape_error(layer_index, kind, "channel counts must be positive");
      if (kernel_width == 0 || kernel_width % 2 == 0)
        shape_error(layer_index, kind, "kernel width must be odd, got " +
                                           std::to_string(kernel_width));
      break;
    case LayerKind::LeakyRelu:
      if (leaky_slope <= 0.0)
        shape_error(layer_index, kind, "leaky slope must be positive");
      break;
    default:
      break;
  }
}

Net::Net(std::vector<LayerSpec> layers, std::size_t input_size,
         std::uint64_t init_seed)
    : layers_(std::move(layers)), input_size_(input_size) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> blocks;
  std::size_t flat = input_size_;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const LayerSpec& spec = layers_[li];
    spec.validate(li);
    flat_in_.push_back(flat);
    param_entry_.push_back(spec.has_params() ? blocks.size() : kNoEntry);
    switch (spec.kind) {
      case LayerKind::Dense:
        if (flat != spec.in_dim)
          shape_error(li, spec.kind,
                      "input size " + std::to_string(flat) + ", expected " +
                          std::to_string(spec.in_dim));
        blocks.emplace_back(std::to_string(li) + ":dense:W",
                            std::vector<std::size_t>{spec.out_dim, spec.in_dim});
        blocks.emplace_back(std::to_string(li) + ":dense:b",
                            std::vector<std::size_t>{spec.out_dim});
        flat = spec.out_dim;
        conv_len_.push_back(0);
        break;
      case LayerKind::Conv1d: {
        if (flat % spec.in_dim != 0)
          shape_error(li, spec.kind,
                      "input size " + std::to_string(flat) +
                          " not divisible by " + std::to_string(spec.in_dim) +
                          " channels");
        const std::size_t len = flat / spec.in_dim;
        if (spec.kernel_width > len)
          shape_error(li, spec.kind,
                      "kernel width " + std::to_string(spec.kernel_width) +
                          " exceeds sequence length " + std::to_string(len));
        blocks.emplace_back(
            std::to_string(li) + ":conv1d:W",
            std::vector<std::size_t>{spec.out_dim, spec.in_dim, spec.kernel_width});
        blocks.emplace_back(std::to_string(li) + ":conv1d:b",
                            std::vector<std::size_t>{spec.out_dim});
        conv_len_.push_back(len);
        flat = spec.out_dim * len;
        break;
      }
      default:
        if (spec.in_dim != 0 && spec.in_dim != flat)
          shape_error(li, spec.kind,
                      "input size " + std::to_string(flat) + ", expected " +
                          std::to_string(spec.in_dim));
        conv_len_.push_back(0);
        break;
    }
    flat_out_.push_back(flat);
  }

  params_ = ParamVector(ParamLayout::build(std::move(blocks)));
  Rng rng(init_seed);
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    if (param_entry_[li] == kNoEntry) continue;
    const LayerSpec& spec = layers_[li];
    const std::size_t fan_in = spec.kind == LayerKind::Dense
                                   ? spec.in_dim
                                   : spec.in_dim * spec.kernel_width;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& w : params_.block(param_entry_[li])) w = rng.uniform(-bound, bound);
    for (double& b : params_.block(param_entry_[li] + 1)) b = rng.uniform(-bound, bound);
  }
}

void Net::set_params(const ParamVector& p) {
  if (!params_.same_layout(p))
    throw std::invalid_argument("set_params: layout mismatch");
  params_ = p;
}

void Net::layer_forward(std::size_t li, std::span<const double> x,
                        std::vector<double>& y) const {
  const LayerSpec& spec = layers_[li];
  const auto& k = kernels::active();
  y.assign(flat_out_[li], 0.0);
  switch (spec.kind) {
    case LayerKind::Dense: {
      std::span<const double> w = params_.block(param_entry_[li]);
      std::span<const double> b = params_.block(param_entry_[li] + 1);
      for (std::size_t i = 0; i < spec.out_dim; ++i)
        y[i] = b[i] + k.dot(w.data() + i * spec.in_dim, x.data(), spec.in_dim);
      break;
    }
    case LayerKind::Conv1d: {
      std::span<const double> w = params_.block(param_entry_[li]);
      std::span<const double> b = params_.block(param_entry_[li] + 1);
      const std::size_t len = conv_len_[li];
      const std::size_t kw = spec.kernel_width;
      const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(kw / 2);
      for (std::size_t oc = 0; oc < spec.out_dim; ++oc) {
        double* yrow = y.data() + oc * len;
        for (std::size_t t = 0; t < len; ++t) yrow[t] = b[oc];
        for (std::size_t ic = 0; ic < spec.in_dim; ++ic) {
          const double* xrow = x.data() + ic * len;
          for (std::size_t d = 0; d < kw; ++d) {
            const double wv = w[(oc * spec.in_dim + ic) * kw + d];
            const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(d) - center;
            const std::size_t t0 = off < 0 ? static_cast<std::size_t>(-off) : 0;
            const std::size_t t1 = off > 0 ? len - static_cast<std::size_t>(off) : len;
            if (t1 > t0) k.axpy(wv, xrow + t0 + off, yrow + t0, t1 - t0);
          }
        }
      }
      break;
    }
    case LayerKind::Relu:
      k.relu(x.data(), y.data(), x.size());
      break;
    case LayerKind::LeakyRelu:
      k.leaky_relu(x.data(), spec.leaky_slope, y.data(), x.size());
      break;
    case LayerKind::Tanh:
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
      break;
    case LayerKind::Sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = 1.0 / (1.0 + std::exp(-x[i]));
      break;
    case LayerKind::Softmax: {
      double mx = -std::numeric_limits<double>::infinity();
      for (double v : x) mx = std::max(mx, v);
      double denom = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::exp(x[i] - mx);
        denom += y[i];
      }
      for (double& v : y) v /= denom;
      break;
    }
  }
}

std::vector<double> Net::forward(std::span<const double> x,
                                 ForwardCache& cache) const {
  if (x.size() != input_size_)
    throw std::invalid_argument("forward: input size " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(input_size_));
  cache.io.assign(layers_.size() + 1, {});
  cache.io[0].assign(x.begin(), x.end());
  for (std::size_t li = 0; li < layers_.size(); ++li)
    layer_forward(li, cache.io[li], cache.io[li + 1]);
  return cache.io.back();
}

std::vector<double> Net::forward(std::span<const double> x) {
  return forward(x, scratch_);
}

void Net::layer_backward(std::size_t li, std::span<const double> upstream,
                         std::span<const double> x, std::span<const double> y,
                         std::vector<double>& gx, ParamVector& grad) const {
  const LayerSpec& spec = layers_[li];
  const auto& k = kernels::active();
  gx.assign(flat_in_[li], 0.0);
  switch (spec.kind) {
    case LayerKind::Dense: {
      std::span<const double> w = params_.block(param_entry_[li]);
      std::span<double> gw = grad.block(param_entry_[li]);
      std::span<double> gb = grad.block(param_entry_[li] + 1);
      for (std::size_t i = 0; i < spec.out_dim; ++i) {
        const double g = upstream[i];
        if (g == 0.0) continue;
        k.axpy(g, x.data(), gw.data() + i * spec.in_dim, spec.in_dim);
        gb[i] += g;
        k.axpy(g, w.data() + i * spec.in_dim, gx.data(), spec.in_dim);
      }
      break;
    }
    case LayerKind::Conv1d: {
      std::span<const double> w = params_.block(param_entry_[li]);
      std::span<double> gw = grad.block(param_entry_[li]);
      std::span<double> gb = grad.block(param_entry_[li] + 1);
      const std::size_t len = conv_len_[li];
      const std::size_t kw = spec.kernel_width;
      const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(kw / 2);
      for (std::size_t oc = 0; oc < spec.out_dim; ++oc) {
        const double* grow = upstream.data() + oc * len;
        gb[oc] += k.sum(grow, len);
        for (std::size_t ic = 0; ic < spec.in_dim; ++ic) {
          const double* xrow = x.data() + ic * len;
          double* gxrow = gx.data() + ic * len;
          for (std::size_t d = 0; d < kw; ++d) {
            const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(d) - center;
            const std::size_t t0 = off < 0 ? static_cast<std::size_t>(-off) : 0;
            const std::size_t t1 = off > 0 ? len - static_cast<std::size_t>(off) : len;
            if (t1 <= t0) continue;
            gw[(oc * spec.in_dim + ic) * kw + d] +=
                k.dot(grow + t0, xrow + t0 + off, t1 - t0);
            k.axpy(w[(oc * spec.in_dim + ic) * kw + d], grow + t0,
                   gxrow + t0 + off, t1 - t0);
          }
        }
      }
      break;
    }
    case LayerKind::Relu:
      for (std::size_t i = 0; i < x.size(); ++i)
        gx[i] = x[i] > 0.0 ? upstream[i] : 0.0;
      break;
    case LayerKind::LeakyRelu:
      for (std::size_t i = 0; i < x.size(); ++i)
        gx[i] = x[i] > 0.0 ? upstream[i] : spec.leaky_slope * upstream[i];
      break;
    case LayerKind::Tanh:
      for (std::size_t i = 0; i < x.size(); ++i)
        gx[i] = upstream[i] * (1.0 - y[i] * y[i]);
      break;
    case LayerKind::Sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i)
        gx[i] = upstream[i] * y[i] * (1.0 - y[i]);
      break;
    case LayerKind::Softmax: {
      const double gy = k.dot(upstream.data(), y.data(), y.size());
      for (std::size_t i = 0; i < y.size(); ++i)
        gx[i] = y[i] * (upstream[i] - gy);
      break;
    }
  }
}

std::vector<double> Net::backward(std::span<const double> upstream,
                                  const ForwardCache& cache,
                                  ParamVector& grad) const {
  if (!cache.valid())
    throw std::logic_error("backward called before forward");
  if (upstream.size() != output_size())
    throw std::invalid_argument("backward: upstream size " +
                                std::to_string(upstream.size()) + ", expected " +
                                std::to_string(output_size()));
  if (!grad.same_layout(params_))
    throw std::invalid_argument("backward: gradient layout mismatch");
  std::vector<double> g(upstream.begin(), upstream.end());
  std::vector<double> gx;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    layer_backward(li, g, cache.io[li], cache.io[li + 1], gx, grad);
    g.swap(gx);
  }
  return g;
}

std::vector<double> Net::backward(std::span<const double> upstream,
                                  ParamVector& grad) const {
  return backward(upstream, scratch_, grad);
}

GradCheckReport grad_check(Net& net, std::span<const double> x,
                           double tolerance, std::uint64_t probe_seed,
                           double fd_step) {
  Rng rng(probe_seed);
  std::vector<double> probe(net.output_size());
  for (double& p : probe) p = rng.uniform(-1.0, 1.0);

  auto objective = [&]() {
    ForwardCache cache;
    std::vector<double> y = net.forward(x, cache);
    return kernels::active().dot(probe.data(), y.data(), y.size());
  };

  ForwardCache cache;
  net.forward(x, cache);
  ParamVector analytic = net.zero_like();
  net.backward(probe, cache, analytic);

  GradCheckReport report;
  report.tolerance = tolerance;
  ParamVector& params = net.params();
  for (const auto& entry : params.layout().entries()) {
    for (std::size_t i = 0; i < entry.size; ++i) {
      const std::size_t idx = entry.offset + i;
      const double saved = params[idx];
      params[idx] = saved + fd_step;
      const double plus = objective();
      params[idx] = saved - fd_step;
      const double minus = objective();
      params[idx] = saved;
      const double numeric = (plus - minus) / (2.0 * fd_step);
      const double a = analytic[idx];
      const double err =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1.0});
      report.entries.push_back({entry.id, i, a, numeric, err});
      report.max_error = std::max(report.max_error, err);
      ++report.checked;
    }
  }
  report.pass = report.max_error < tolerance;
  return report;
}

Optimizer::Optimizer(Kind kind, double learning_rate, double beta1,
                     double beta2, double epsilon)
    : kind_(kind), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

void Optimizer::step(ParamVector& params, const ParamVector& grad) {
  if (!params.same_layout(grad))
    throw std::invalid_argument("optimizer step: layout mismatch");
  if (kind_ == Kind::Sgd) {
    kernels::active().axpy(-lr_, grad.data(), params.data(), params.size());
    return;
  }
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
    t_ = 0;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
  }
}

}  // namespace slicesim::nn
