#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slicesim/nn/net.hpp"
#include "slicesim/twin/gat.hpp"
#include "slicesim/twin/graph.hpp"

namespace slicesim::twin {

enum class HeadMode { Linear, Softmax };

struct TwinConfig {
  std::size_t nodes = 20;
  std::size_t window = 12;
  std::size_t conv_kernel = 5;
  std::size_t conv_hidden = 8;
  std::size_t features = 16;     // F
  std::size_t embed = 16;        // e
  std::size_t graph_dim = 16;    // projection width of Theta1/Theta2
  std::size_t attn_dim = 16;     // D
  std::size_t out_dim = 16;      // H
  std::size_t head_hidden = 16;
  double beta = 1.0;
  double attn_leaky_slope = 0.2;
  double learning_rate = 0.01;
  HeadMode head_mode = HeadMode::Linear;
  nn::Optimizer::Kind optimizer = nn::Optimizer::Kind::Sgd;

  void validate() const;
};

struct TwinForward {
  std::vector<nn::ForwardCache> ext_caches;
  std::vector<double> features;  // V x F
  GraphSnapshot graph;
  AttentionResult attn;
  std::vector<double> s_proj;    // V x H, W_s x_v
  std::vector<double> mixed;     // V x H pre-sigmoid
  std::vector<double> xprime;    // V x H
  std::vector<double> pooled;    // H
  nn::ForwardCache head_cache;
  double y_raw = 0.0;
  double d_hat = 0.0;
  std::vector<nn::ForwardCache> node_head_caches;  // softmax head
  std::vector<double> node_scores;                 // softmax head
  std::vector<double> shares;                      // softmax head
};

// One forecasting twin: shared per-node conv extractor, adaptive graph,
// GAT mixing, sum pooling, MLP head. All parameters live in one flat
// vector so federation can average and broadcast whole models.
class TwinModel {
 public:
  TwinModel(const TwinConfig& cfg, std::uint64_t seed);

  const TwinConfig& config() const { return cfg_; }
  const nn::ParamVector& params() const { return params_; }
  std::shared_ptr<const nn::ParamLayout> layout() const { return params_.layout_ptr(); }
  void import_params(const nn::ParamVector& p);

  // window is V x L row-major demand, already normalized by the caller.
  std::vector<double> extract_features(std::span<const double> window,
                                       std::vector<nn::ForwardCache>* caches = nullptr) const;
  TwinForward forward(std::span<const double> window) const;
  double predict(std::span<const double> window) const;
  std::vector<double> predict_shares(std::span<const double> window) const;

  // MAE on the slice aggregate (linear head). Returns the loss before the
  // update; throws on non-finite loss.
  double train_step(std::span<const double> window, double target);
  // MAE on per-node demand (softmax head), target is V next-step demands.
  double train_step_nodes(std::span<const double> window,
                          std::span<const double> node_targets);

  nn::ParamVector gradient(const TwinForward& fwd, double upstream_dhat) const;

  double learning_rate() const { return opt_.learning_rate(); }
  void set_learning_rate(double lr) { opt_.set_learning_rate(lr); }

 private:
  TwinConfig cfg_;
  nn::Net extractor_;
  nn::Net head_;
  nn::ParamVector params_;
  nn::Optimizer opt_;

  void sync_nets();
  // Propagates dL/dx' (V x H) through sigmoid, mixing, attention and the
  // extractor, accumulating into the combined gradient.
  void backward_features(const TwinForward& fwd, std::span<const double> d_xprime,
                         nn::ParamVector& grad) const;
};

}  // namespace slicesim::twin
