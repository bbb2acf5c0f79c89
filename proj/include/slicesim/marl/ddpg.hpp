#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slicesim/core/rng.hpp"
#include "slicesim/marl/replay.hpp"
#include "slicesim/nn/net.hpp"

namespace slicesim::marl {

struct DdpgConfig {
  std::size_t state_dim = 3;
  std::size_t hidden = 64;
  std::size_t hidden_layers = 2;
  double gamma = 0.95;
  double nu = 0.01;          // soft-update rate for the target networks
  double learning_rate = 0.1;
  nn::Optimizer::Kind optimizer = nn::Optimizer::Kind::Sgd;
  double delta_fraction = 0.1;  // |Δw| ceiling as a share of the RB pool

  void validate() const;
};

// State vector [demand, predicted demand, current allocation share]; the
// allocation component can be dropped to recover the two-component form.
std::vector<double> slice_state(double demand_norm, double predicted_norm,
                                double alloc_frac, bool include_alloc = true);

// Maps an action in [-1, 1] to a resource-block delta.
int action_to_delta(double a, int total_rbs, double delta_fraction = 0.1);

// Exploration schedules: epsilon-uniform branch and Gaussian policy noise.
double exploration_epsilon(std::uint64_t t);
double exploration_noise(std::uint64_t t);

class DdpgAgent {
 public:
  DdpgAgent(const DdpgConfig& cfg, std::uint64_t seed);

  // With probability epsilon a uniform action; otherwise the policy output
  // plus clipped Gaussian noise. Always in [-1, 1].
  double select_action(std::span<const double> s, double epsilon,
                       double noise_std, Rng& rng) const;
  double policy(std::span<const double> s) const;
  double critic_value(std::span<const double> s, double a) const;
  // Bootstrap target Q'(s', pi'(s')) from the target networks.
  double target_value(std::span<const double> s_next) const;

  // One optimizer step on the critic toward y = r + gamma * target_value(s').
  // Returns the batch loss before the step. Targets are untouched.
  double critic_update(std::span<const Experience* const> batch);
  // One ascent step on mean_i Q(s_i, pi(s_i)). Returns the gradient norm.
  // The critic is untouched.
  double actor_update(std::span<const Experience* const> batch);
  // Ascent direction used by actor_update, exposed for diagnostics.
  nn::ParamVector actor_gradient(std::span<const Experience* const> batch) const;

  void soft_update();

  const nn::ParamVector& actor_params() const { return actor_.params(); }
  const nn::ParamVector& critic_params() const { return critic_.params(); }
  const nn::ParamVector& target_actor_params() const {
    return actor_target_.params();
  }
  const nn::ParamVector& target_critic_params() const {
    return critic_target_.params();
  }
  void import_actor(const nn::ParamVector& p) { actor_.set_params(p); }
  void import_critic(const nn::ParamVector& p) { critic_.set_params(p); }

  const DdpgConfig& config() const { return cfg_; }

 private:
  DdpgConfig cfg_;
  nn::Net actor_, critic_, actor_target_, critic_target_;
  nn::Optimizer actor_opt_, critic_opt_;
};

}  // namespace slicesim::marl
