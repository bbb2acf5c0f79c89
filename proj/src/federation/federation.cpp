#include "slicesim/federation/federation.hpp"

#include <stdexcept>

namespace slicesim::federation {

void CommLedger::charge_upload(std::uint64_t scalars) {
  uploaded_ += scalars;
  ++messages_;
}

void CommLedger::charge_download(std::uint64_t scalars) {
  downloaded_ += scalars;
  ++messages_;
}

nn::ParamVector aggregate(std::span<const nn::ParamVector> locals,
                          std::span<const std::size_t> sizes) {
  if (locals.empty())
    throw std::invalid_argument("aggregate: no local models");
  if (locals.size() != sizes.size())
    throw std::invalid_argument("aggregate: locals/sizes length mismatch");

  std::uint64_t total = 0;
  for (std::size_t n : sizes) {
    if (n == 0) throw std::invalid_argument("aggregate: zero dataset size");
    total += n;
  }
  for (std::size_t m = 1; m < locals.size(); ++m) {
    if (!locals[m].same_layout(locals[0]))
      throw std::invalid_argument("aggregate: parameter layout mismatch");
  }

  nn::ParamVector out(locals[0].layout_ptr());
  for (std::size_t m = 0; m < locals.size(); ++m) {
    const double w =
        static_cast<double>(sizes[m]) / static_cast<double>(total);
    const double* src = locals[m].data();
    double* dst = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) dst[i] += w * src[i];
  }
  return out;
}

double global_loss(std::span<const double> losses,
                   std::span<const std::size_t> sizes) {
  if (losses.empty() || losses.size() != sizes.size())
    throw std::invalid_argument("global_loss: bad inputs");
  std::uint64_t total = 0;
  for (std::size_t n : sizes) {
    if (n == 0) throw std::invalid_argument("global_loss: zero dataset size");
    total += n;
  }
  double acc = 0.0;
  for (std::size_t m = 0; m < losses.size(); ++m) {
    acc += static_cast<double>(sizes[m]) / static_cast<double>(total) *
           losses[m];
  }
  return acc;
}

bool should_aggregate(std::uint64_t t, std::uint64_t agg_tau) {
  if (agg_tau == 0)
    throw std::invalid_argument("should_aggregate: period must be positive");
  return t % agg_tau == 0;
}

void run_round(std::span<marl::DdpgAgent* const> agents,
               std::span<const std::size_t> sizes, CommLedger& ledger) {
  if (agents.empty())
    throw std::invalid_argument("run_round: no agents");
  if (agents.size() != sizes.size())
    throw std::invalid_argument("run_round: agents/sizes length mismatch");

  ledger.begin_round();

  std::vector<LocalUpdate> updates;
  updates.reserve(agents.size());
  for (std::size_t m = 0; m < agents.size(); ++m) {
    updates.push_back({agents[m]->actor_params(), agents[m]->critic_params(),
                       sizes[m]});
    ledger.charge_upload(updates.back().actor.size() +
                         updates.back().critic.size());
  }

  std::vector<nn::ParamVector> actors;
  std::vector<nn::ParamVector> critics;
  actors.reserve(updates.size());
  critics.reserve(updates.size());
  for (auto& u : updates) {
    actors.push_back(std::move(u.actor));
    critics.push_back(std::move(u.critic));
  }
  const nn::ParamVector global_actor = aggregate(actors, sizes);
  const nn::ParamVector global_critic = aggregate(critics, sizes);

  for (marl::DdpgAgent* agent : agents) {
    agent->import_actor(global_actor);
    agent->import_critic(global_critic);
    agent->soft_update();
    ledger.charge_download(global_actor.size() + global_critic.size());
  }
}

void run_twin_round(std::span<twin::TwinModel* const> twins,
                    std::span<const std::size_t> sizes, CommLedger& ledger) {
  if (twins.empty())
    throw std::invalid_argument("run_twin_round: no twins");
  if (twins.size() != sizes.size())
    throw std::invalid_argument("run_twin_round: twins/sizes length mismatch");

  ledger.begin_round();

  std::vector<nn::ParamVector> locals;
  locals.reserve(twins.size());
  for (twin::TwinModel* t : twins) {
    locals.push_back(t->params());
    ledger.charge_upload(locals.back().size());
  }
  const nn::ParamVector global = aggregate(locals, sizes);
  for (twin::TwinModel* t : twins) {
    t->import_params(global);
    ledger.charge_download(global.size());
  }
}

}  // namespace slicesim::federation
