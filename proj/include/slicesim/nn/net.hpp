#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slicesim/nn/layer.hpp"
#include "slicesim/nn/param_vector.hpp"

namespace slicesim::nn {

// Per-call activation storage. io[0] is the network input, io[i+1] the
// output of layer i. Keeping the cache outside the net lets one parameter
// set run many forwards (per node, per batch sample) before backward.
struct ForwardCache {
  std::vector<std::vector<double>> io;
  bool valid() const { return !io.empty(); }
};

class Net {
 public:
  Net(std::vector<LayerSpec> layers, std::size_t input_size,
      std::uint64_t init_seed);

  std::size_t input_size() const { return input_size_; }
  std::size_t output_size() const { return flat_out_.empty() ? input_size_ : flat_out_.back(); }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }
  void set_params(const ParamVector& p);
  std::shared_ptr<const ParamLayout> layout() const { return params_.layout_ptr(); }
  ParamVector zero_like() const { return ParamVector(layout()); }

  std::vector<double> forward(std::span<const double> x, ForwardCache& cache) const;
  std::vector<double> forward(std::span<const double> x);

  // Accumulates parameter gradients into grad (same layout as params) and
  // returns the gradient with respect to the network input.
  std::vector<double> backward(std::span<const double> upstream,
                               const ForwardCache& cache,
                               ParamVector& grad) const;
  std::vector<double> backward(std::span<const double> upstream, ParamVector& grad) const;

 private:
  std::vector<LayerSpec> layers_;
  std::size_t input_size_;
  std::vector<std::size_t> flat_in_, flat_out_, conv_len_;
  std::vector<std::size_t> param_entry_;  // first layout entry per layer, npos if none
  ParamVector params_;
  ForwardCache scratch_;

  void layer_forward(std::size_t li, std::span<const double> x,
                     std::vector<double>& y) const;
  void layer_backward(std::size_t li, std::span<const double> upstream,
                      std::span<const double> x, std::span<const double> y,
                      std::vector<double>& gx, ParamVector& grad) const;
};

// Finite-difference gradient verification on the scalar J = u . f(x) with a
// fixed random probe u. Report-only; never throws on failure.
struct GradCheckEntry {
  std::string block_id;
  std::size_t index;
  double analytic;
  double numeric;
  double error;
};

struct GradCheckReport {
  bool pass = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::size_t checked = 0;
  std::vector<GradCheckEntry> entries;  // all parameters, in layout order
};

GradCheckReport grad_check(Net& net, std::span<const double> x, double tolerance,
                           std::uint64_t probe_seed, double fd_step = 1e-5);

class Optimizer {
 public:
  enum class Kind { Sgd, Adam };

  explicit Optimizer(Kind kind, double learning_rate, double beta1 = 0.9,
                     double beta2 = 0.999, double epsilon = 1e-8);

  void step(ParamVector& params, const ParamVector& grad);
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace slicesim::nn
