#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slicesim/marl/ddpg.hpp"
#include "slicesim/nn/param_vector.hpp"
#include "slicesim/twin/model.hpp"

namespace slicesim::federation {

// The only payload a slice hands to the orchestrator: model parameters plus
// the local dataset size used for weighting. No experiences, demand samples,
// or per-user state ever cross this boundary.
struct LocalUpdate {
  nn::ParamVector actor;
  nn::ParamVector critic;
  std::size_t dataset_size = 0;
};

// Running totals for orchestrator traffic. Counters only go up.
class CommLedger {
 public:
  void begin_round() { ++rounds_; }
  void charge_upload(std::uint64_t scalars);
  void charge_download(std::uint64_t scalars);

  std::uint64_t uploaded_scalars() const { return uploaded_; }
  std::uint64_t downloaded_scalars() const { return downloaded_; }
  std::uint64_t total_scalars() const { return uploaded_ + downloaded_; }
  std::uint64_t messages() const { return messages_; }
  std::uint64_t rounds() const { return rounds_; }

 private:
  std::uint64_t uploaded_ = 0;
  std::uint64_t downloaded_ = 0;
  std::uint64_t messages_ = 0;
  std::uint64_t rounds_ = 0;
};

// Dataset-size weighted average of parameter vectors: sum_m (n_m / n) theta_m.
// Plain scalar loops so the result is reproducible bit for bit.
nn::ParamVector aggregate(std::span<const nn::ParamVector> locals,
                          std::span<const std::size_t> sizes);

// Same weighting applied to scalar objectives.
double global_loss(std::span<const double> losses,
                   std::span<const std::size_t> sizes);

// True on steps that are multiples of the aggregation period.
bool should_aggregate(std::uint64_t t, std::uint64_t agg_tau);

// One aggregation round over the DDPG agents: collect actor and critic
// parameters weighted by dataset size, average them, and push the result back
// to every agent. Main networks take the global parameters directly; target
// networks move one soft-update step toward them. The ledger is charged
// per agent for upload and download of the full actor+critic payload.
void run_round(std::span<marl::DdpgAgent* const> agents,
               std::span<const std::size_t> sizes, CommLedger& ledger);

// Optional twin aggregation (off by default in experiments): averages the
// forecaster parameters the same way and installs the result in every twin.
void run_twin_round(std::span<twin::TwinModel* const> twins,
                    std::span<const std::size_t> sizes, CommLedger& ledger);

}  // namespace slicesim::federation
