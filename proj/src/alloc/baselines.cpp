#include "slicesim/alloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace slicesim::alloc {

namespace {

std::vector<nn::LayerSpec> q_layers(const DqnConfig& cfg) {
  std::vector<nn::LayerSpec> layers;
  layers.push_back(nn::LayerSpec::dense(cfg.state_dim, cfg.hidden));
  layers.push_back(nn::LayerSpec::relu());
  layers.push_back(nn::LayerSpec::dense(cfg.hidden, cfg.hidden));
  layers.push_back(nn::LayerSpec::relu());
  layers.push_back(nn::LayerSpec::dense(cfg.hidden, cfg.actions));
  return layers;
}

}  // namespace

std::string_view to_string(AllocatorId id) {
  switch (id) {
    case AllocatorId::DtMafl: return "dt-mafl";
    case AllocatorId::FlOnly: return "fl-only";
    case AllocatorId::Madqn: return "madqn";
    case AllocatorId::Netshare: return "netshare";
  }
  throw std::invalid_argument("to_string: unknown allocator id");
}

AllocatorId allocator_from_string(std::string_view name) {
  for (AllocatorId id : kAllAllocators) {
    if (to_string(id) == name) return id;
  }
  throw std::invalid_argument("allocator_from_string: unknown allocator '" +
                              std::string(name) + "'");
}

radio::AllocationState netshare_allocate(std::span<const double> demands,
                                         int total_rbs, int kappa) {
  const std::size_t m = demands.size();
  if (m == 0) throw std::invalid_argument("netshare_allocate: no slices");
  if (kappa < 1 || total_rbs < 1)
    throw std::invalid_argument("netshare_allocate: bad pool parameters");
  if (static_cast<std::size_t>(total_rbs) < m)
    throw std::invalid_argument(
        "netshare_allocate: pool smaller than slice count");
  for (double d : demands) {
    if (!(d >= 0.0))
      throw std::invalid_argument("netshare_allocate: negative demand");
  }

  radio::AllocationState out;
  out.kappa = kappa;
  out.total_rbs = total_rbs;
  out.rbs.assign(m, 1);

  const double sum = std::accumulate(demands.begin(), demands.end(), 0.0);
  std::vector<double> ideal(m, 0.0);
  if (sum > 0.0) {
    for (std::size_t i = 0; i < m; ++i)
      ideal[i] = total_rbs * demands[i] / sum;
  } else {
    for (std::size_t i = 0; i < m; ++i)
      ideal[i] = static_cast<double>(total_rbs) / static_cast<double>(m);
  }

  int assigned = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const int base = static_cast<int>(std::floor(ideal[i]));
    out.rbs[i] = std::clamp(base, 1, kappa);
    assigned += out.rbs[i];
  }

  if (assigned < total_rbs) {
    // Largest fractional remainder first; ties go to the lower index. A
    // slice bumped up to its 1-RB floor carries a negative remainder and
    // only receives spares after everyone else.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return ideal[a] - out.rbs[a] > ideal[b] - out.rbs[b];
                     });
    while (assigned < total_rbs) {
      bool any = false;
      for (std::size_t i : order) {
        if (assigned == total_rbs) break;
        if (out.rbs[i] < kappa) {
          ++out.rbs[i];
          ++assigned;
          any = true;
        }
      }
      if (!any) break;
    }
  }
  while (assigned > total_rbs) {
    std::size_t victim = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (out.rbs[i] > 1 && (victim == m || out.rbs[i] > out.rbs[victim]))
        victim = i;
    }
    if (victim == m) break;
    --out.rbs[victim];
    --assigned;
  }
  return out;
}

std::vector<double> fl_only_state(double demand_norm, double lagged_norm,
                                  double alloc_frac) {
  return {demand_norm, lagged_norm, alloc_frac};
}

int dqn_action_delta(std::size_t action, int total_rbs) {
  if (action >= kDqnDeltaPct.size())
    throw std::invalid_argument("dqn_action_delta: action out of range");
  return static_cast<int>(std::llround(kDqnDeltaPct[action] * total_rbs));
}

void DqnConfig::validate() const {
  if (state_dim < 1 || hidden < 1)
    throw std::invalid_argument("dqn config: network dims must be >= 1");
  if (actions != kDqnDeltaPct.size())
    throw std::invalid_argument("dqn config: action count must match deltas");
  if (gamma < 0.0 || gamma >= 1.0)
    throw std::invalid_argument("dqn config: gamma must be in [0, 1)");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("dqn config: learning rate must be > 0");
  if (target_period < 1)
    throw std::invalid_argument("dqn config: target period must be >= 1");
}

DqnAgent::DqnAgent(const DqnConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      q_(q_layers(cfg), cfg.state_dim, mix_seed(seed, 0xD09)),
      target_(q_),
      opt_(cfg.optimizer, cfg.learning_rate) {
  cfg_.validate();
}

std::vector<double> DqnAgent::q_values(std::span<const double> s) const {
  nn::ForwardCache cache;
  return q_.forward(s, cache);
}

std::size_t DqnAgent::greedy_action(std::span<const double> s) const {
  const std::vector<double> q = q_values(s);
  return static_cast<std::size_t>(
      std::max_element(q.begin(), q.end()) - q.begin());
}

std::size_t DqnAgent::select_action(std::span<const double> s, double epsilon,
                                    Rng& rng) const {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("select_action: epsilon must be in [0, 1]");
  if (rng.uniform01() < epsilon) return rng.below(cfg_.actions);
  return greedy_action(s);
}

double DqnAgent::update(std::span<const marl::Experience* const> batch) {
  if (batch.empty()) throw std::invalid_argument("dqn update: empty batch");
  nn::ParamVector grad = q_.zero_like();
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  std::vector<double> upstream(cfg_.actions, 0.0);
  for (const marl::Experience* exp : batch) {
    const auto action = static_cast<std::size_t>(exp->a);
    if (action >= cfg_.actions || exp->a != std::floor(exp->a) || exp->a < 0.0)
      throw std::invalid_argument("dqn update: action is not a valid index");
    nn::ForwardCache tcache;
    const std::vector<double> qn = target_.forward(exp->s_next, tcache);
    const double best_next = *std::max_element(qn.begin(), qn.end());
    const double y = exp->r + cfg_.gamma * best_next;

    nn::ForwardCache cache;
    const std::vector<double> q = q_.forward(exp->s, cache);
    const double err = q[action] - y;
    loss += err * err;
    std::fill(upstream.begin(), upstream.end(), 0.0);
    upstream[action] = 2.0 * err / n;
    q_.backward(upstream, cache, grad);
  }
  nn::ParamVector params = q_.params();
  opt_.step(params, grad);
  q_.set_params(params);
  ++updates_;
  if (updates_ % cfg_.target_period == 0) target_.set_params(q_.params());
  return loss / n;
}

void madqn_report_step(federation::CommLedger& ledger, const DqnAgent& agent) {
  ledger.charge_upload(agent.config().state_dim + 1);
  ledger.charge_upload(agent.params().size());
}

}  // namespace slicesim::alloc
