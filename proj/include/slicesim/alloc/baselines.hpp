#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "slicesim/core/rng.hpp"
#include "slicesim/federation/federation.hpp"
#include "slicesim/marl/replay.hpp"
#include "slicesim/nn/net.hpp"
#include "slicesim/radio/types.hpp"

namespace slicesim::alloc {

enum class AllocatorId { DtMafl, FlOnly, Madqn, Netshare };

inline constexpr std::array<AllocatorId, 4> kAllAllocators{
    AllocatorId::DtMafl, AllocatorId::FlOnly, AllocatorId::Madqn,
    AllocatorId::Netshare};

std::string_view to_string(AllocatorId id);
AllocatorId allocator_from_string(std::string_view name);

// Centralized proportional sharing: every slice gets at least one RB, the
// rest of the pool is split in proportion to demand with floor rounding, and
// leftover RBs go one at a time to the largest fractional remainders (ties
// favor the lower slice index). All-zero demand degrades to an equal split.
radio::AllocationState netshare_allocate(std::span<const double> demands,
                                         int total_rbs, int kappa);

// State for the federated-but-twinless ablation: the lagged actual demand
// stands in where the twin's forecast would go.
std::vector<double> fl_only_state(double demand_norm, double lagged_norm,
                                  double alloc_frac);

// Discrete RB adjustments available to a DQN agent, as fractions of the pool.
inline constexpr std::array<double, 5> kDqnDeltaPct{-0.10, -0.05, 0.0, 0.05,
                                                    0.10};

int dqn_action_delta(std::size_t action, int total_rbs);

struct DqnConfig {
  std::size_t state_dim = 3;
  std::size_t hidden = 64;
  std::size_t actions = kDqnDeltaPct.size();
  double gamma = 0.95;
  double learning_rate = 0.05;
  nn::Optimizer::Kind optimizer = nn::Optimizer::Kind::Sgd;
  std::size_t target_period = 100;

  void validate() const;
};

// Independent per-slice Q-learner over the discrete delta set. No federation:
// each agent trains on its own replay and reports to a central monitor
// instead of exchanging models with peers.
class DqnAgent {
 public:
  DqnAgent(const DqnConfig& cfg, std::uint64_t seed);

  std::vector<double> q_values(std::span<const double> s) const;
  std::size_t greedy_action(std::span<const double> s) const;
  std::size_t select_action(std::span<const double> s, double epsilon,
                            Rng& rng) const;

  // One minibatch of TD(0) updates toward r + gamma * max_a' Q_target(s', a').
  // The stored action field is the action index. Returns the mean TD loss;
  // the target net is refreshed by hard copy every target_period updates.
  double update(std::span<const marl::Experience* const> batch);

  const nn::ParamVector& params() const { return q_.params(); }
  const nn::ParamVector& target_params() const { return target_.params(); }
  const DqnConfig& config() const { return cfg_; }
  std::uint64_t updates() const { return updates_; }

 private:
  DqnConfig cfg_;
  nn::Net q_;
  nn::Net target_;
  nn::Optimizer opt_;
  std::uint64_t updates_ = 0;
};

// Per-step central reporting for the non-federated baseline: one message
// carrying the observed state and reward, one carrying the agent's current
// Q parameters.
void madqn_report_step(federation::CommLedger& ledger, const DqnAgent& agent);

}  // namespace slicesim::alloc
