#include "slicesim/marl/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slicesim/kernels/kernels.hpp"

namespace slicesim::marl {

namespace {

std::vector<nn::LayerSpec> mlp_layers(std::size_t in, std::size_t hidden,
                                      std::size_t hidden_layers, bool tanh_out) {
  std::vector<nn::LayerSpec> layers;
  std::size_t width = in;
  for (std::size_t i = 0; i < hidden_layers; ++i) {
    layers.push_back(nn::LayerSpec::dense(width, hidden));
    layers.push_back(nn::LayerSpec::relu());
    width = hidden;
  }
  layers.push_back(nn::LayerSpec::dense(width, 1));
  if (tanh_out) layers.push_back(nn::LayerSpec::tanh());
  return layers;
}

}  // namespace

void DdpgConfig::validate() const {
  if (state_dim < 1 || hidden < 1 || hidden_layers < 1)
    throw std::invalid_argument("ddpg config: network dims must be >= 1");
  if (gamma < 0.0 || gamma >= 1.0)
    throw std::invalid_argument("ddpg config: gamma must be in [0, 1)");
  if (nu <= 0.0 || nu > 1.0)
    throw std::invalid_argument("ddpg config: nu must be in (0, 1]");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("ddpg config: learning rate must be > 0");
  if (delta_fraction <= 0.0 || delta_fraction > 1.0)
    throw std::invalid_argument("ddpg config: delta fraction must be in (0, 1]");
}

std::vector<double> slice_state(double demand_norm, double predicted_norm,
                                double alloc_frac, bool include_alloc) {
  if (include_alloc) return {demand_norm, predicted_norm, alloc_frac};
  return {demand_norm, predicted_norm};
}

int action_to_delta(double a, int total_rbs, double delta_fraction) {
  const double clipped = std::clamp(a, -1.0, 1.0);
  return static_cast<int>(std::llround(clipped * delta_fraction * total_rbs));
}

double exploration_epsilon(std::uint64_t t) {
  return std::max(0.01, 0.5 * std::pow(0.995, static_cast<double>(t)));
}

double exploration_noise(std::uint64_t t) {
  return 0.1 * std::pow(0.999, static_cast<double>(t));
}

DdpgAgent::DdpgAgent(const DdpgConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      actor_(mlp_layers(cfg.state_dim, cfg.hidden, cfg.hidden_layers, true),
             cfg.state_dim, mix_seed(seed, 0xAC10)),
      critic_(mlp_layers(cfg.state_dim + 1, cfg.hidden, cfg.hidden_layers, false),
              cfg.state_dim + 1, mix_seed(seed, 0xC417)),
      actor_target_(actor_),
      critic_target_(critic_),
      actor_opt_(cfg.optimizer, cfg.learning_rate),
      critic_opt_(cfg.optimizer, cfg.learning_rate) {
  cfg_.validate();
}

double DdpgAgent::policy(std::span<const double> s) const {
  nn::ForwardCache cache;
  return actor_.forward(s, cache)[0];
}

double DdpgAgent::critic_value(std::span<const double> s, double a) const {
  std::vector<double> in(s.begin(), s.end());
  in.push_back(a);
  nn::ForwardCache cache;
  return critic_.forward(in, cache)[0];
}

double DdpgAgent::target_value(std::span<const double> s_next) const {
  nn::ForwardCache cache;
  const double a_next = actor_target_.forward(s_next, cache)[0];
  std::vector<double> in(s_next.begin(), s_next.end());
  in.push_back(a_next);
  nn::ForwardCache ccache;
  return critic_target_.forward(in, ccache)[0];
}

double DdpgAgent::select_action(std::span<const double> s, double epsilon,
                                double noise_std, Rng& rng) const {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("select_action: epsilon must be in [0, 1]");
  if (rng.uniform01() < epsilon) return rng.uniform(-1.0, 1.0);
  double a = policy(s);
  if (noise_std > 0.0) a += rng.normal(0.0, noise_std);
  return std::clamp(a, -1.0, 1.0);
}

double DdpgAgent::critic_update(std::span<const Experience* const> batch) {
  if (batch.empty())
    throw std::invalid_argument("critic_update: empty batch");
  nn::ParamVector grad = critic_.zero_like();
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  std::vector<double> in(cfg_.state_dim + 1);
  for (const Experience* exp : batch) {
    const double y = exp->r + cfg_.gamma * target_value(exp->s_next);
    std::copy(exp->s.begin(), exp->s.end(), in.begin());
    in[cfg_.state_dim] = exp->a;
    nn::ForwardCache cache;
    const double q = critic_.forward(in, cache)[0];
    const double err = q - y;
    loss += err * err;
    const double upstream = 2.0 * err / n;
    critic_.backward(std::span(&upstream, 1), cache, grad);
  }
  nn::ParamVector params = critic_.params();
  critic_opt_.step(params, grad);
  critic_.set_params(params);
  return loss / n;
}

nn::ParamVector DdpgAgent::actor_gradient(
    std::span<const Experience* const> batch) const {
  if (batch.empty())
    throw std::invalid_argument("actor_gradient: empty batch");
  nn::ParamVector grad = actor_.zero_like();
  nn::ParamVector critic_scratch = critic_.zero_like();
  const double n = static_cast<double>(batch.size());
  std::vector<double> in(cfg_.state_dim + 1);
  for (const Experience* exp : batch) {
    nn::ForwardCache acache;
    const double a = actor_.forward(exp->s, acache)[0];
    std::copy(exp->s.begin(), exp->s.end(), in.begin());
    in[cfg_.state_dim] = a;
    nn::ForwardCache ccache;
    critic_.forward(in, ccache);
    const double upstream = 1.0 / n;
    const std::vector<double> d_in =
        critic_.backward(std::span(&upstream, 1), ccache, critic_scratch);
    const double dq_da = d_in[cfg_.state_dim];
    actor_.backward(std::span(&dq_da, 1), acache, grad);
  }
  return grad;
}

double DdpgAgent::actor_update(std::span<const Experience* const> batch) {
  nn::ParamVector grad = actor_gradient(batch);
  const auto& k = kernels::active();
  const double norm = std::sqrt(k.sqnorm(grad.data(), grad.size()));
  // The optimizer descends; ascend by stepping along the negated gradient.
  k.scal(-1.0, grad.data(), grad.size());
  nn::ParamVector params = actor_.params();
  actor_opt_.step(params, grad);
  actor_.set_params(params);
  return norm;
}

void DdpgAgent::soft_update() {
  const auto& k = kernels::active();
  auto blend_into = [&](nn::Net& target, const nn::Net& main) {
    nn::ParamVector tp = target.params();
    const nn::ParamVector& mp = main.params();
    k.blend(cfg_.nu, mp.data(), 1.0 - cfg_.nu, tp.data(), tp.data(), tp.size());
    target.set_params(tp);
  };
  blend_into(actor_target_, actor_);
  blend_into(critic_target_, critic_);
}

}  // namespace slicesim::marl
