#include "slicesim/exp/runner.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "slicesim/core/log.hpp"
#include "slicesim/core/rng.hpp"
#include "slicesim/federation/federation.hpp"
#include "slicesim/marl/replay.hpp"
#include "slicesim/radio/allocation.hpp"
#include "slicesim/radio/environment.hpp"
#include "slicesim/twin/baselines.hpp"

namespace slicesim::exp {

namespace {

// Independent seed streams per concern, slice index added per slice.
constexpr std::uint64_t kTopoStream = 0x10;
constexpr std::uint64_t kTraceStream = 0x90;
constexpr std::uint64_t kEnvStream = 0x11E;
constexpr std::uint64_t kTwinStream = 0x120;
constexpr std::uint64_t kAgentStream = 0x1A0;
constexpr std::uint64_t kExploreStream = 0x1EE;

struct PendingStep {
  bool valid = false;
  std::vector<double> s;
  double a = 0.0;
  double r = 0.0;
};

// Running one-step forecast error for a slice's forecaster.
struct ForecastTracker {
  bool has_prediction = false;
  double prediction = 0.0;
  double sq_sum = 0.0;
  std::size_t n = 0;

  void settle(double actual) {
    if (!has_prediction) return;
    const double err = prediction - actual;
    sq_sum += err * err;
    ++n;
    has_prediction = false;
  }
  double rmse() const {
    return n == 0 ? 0.0 : std::sqrt(sq_sum / static_cast<double>(n));
  }
};

}  // namespace

RunArtifacts run_experiment(const Scenario& scenario, std::uint64_t seed,
                            alloc::AllocatorId allocator) {
  const std::size_t m_slices = scenario.slices.size();
  if (m_slices == 0)
    throw std::invalid_argument("run_experiment: scenario has no slices");

  const bool use_twin = allocator == alloc::AllocatorId::DtMafl;
  const bool use_ddpg = allocator == alloc::AllocatorId::DtMafl ||
                        allocator == alloc::AllocatorId::FlOnly;
  const bool use_dqn = allocator == alloc::AllocatorId::Madqn;
  const std::string allocator_name(alloc::to_string(allocator));

  std::vector<radio::SliceSpec> specs;
  for (const SliceScenario& s : scenario.slices)
    specs.push_back(to_slice_spec(s));

  std::vector<traffic::DemandTensor> traces;
  for (std::size_t m = 0; m < m_slices && scenario.steps > 0; ++m) {
    traffic::TopologyOptions topt;
    topt.scale_m = scenario.traffic.scale_m;
    topt.cell_radius_m = scenario.radio.cell_radius_m;
    topt.rho = scenario.traffic.rho;
    const traffic::LatentTopology topo =
        traffic::gen_topology(scenario.slices[m].device_count,
                              mix_seed(seed, kTopoStream + m), topt);
    traffic::TraceOptions opt;
    opt.amplitude = scenario.traffic.amplitude;
    opt.noise_std = scenario.traffic.noise_std;
    opt.period = scenario.traffic.period;
    opt.random_phase = scenario.traffic.random_phase;
    traces.push_back(traffic::gen_traces(topo, scenario.steps,
                                         scenario.traffic.base_load_mbps,
                                         mix_seed(seed, kTraceStream + m),
                                         opt));
    traces.back().slice_id = scenario.slices[m].id;
  }

  radio::Environment env(scenario.radio, specs, mix_seed(seed, kEnvStream));
  radio::AllocationState alloc_state = env.initial_allocation();
  const int total_rbs = scenario.radio.total_rbs;

  std::vector<std::unique_ptr<twin::TwinForecaster>> twins;
  std::vector<std::unique_ptr<marl::DdpgAgent>> agents;
  std::vector<std::unique_ptr<alloc::DqnAgent>> dqns;
  std::vector<std::unique_ptr<marl::ReplayBuffer>> replays;
  for (std::size_t m = 0; m < m_slices; ++m) {
    if (use_twin) {
      twins.push_back(std::make_unique<twin::TwinForecaster>(
          to_twin_config(scenario.twin, scenario.slices[m].device_count),
          mix_seed(seed, kTwinStream + m), scenario.twin.demand_scale_mbps));
    }
    if (use_ddpg) {
      agents.push_back(std::make_unique<marl::DdpgAgent>(
          to_ddpg_config(scenario.agent), mix_seed(seed, kAgentStream + m)));
    }
    if (use_dqn) {
      dqns.push_back(std::make_unique<alloc::DqnAgent>(
          to_dqn_config(scenario.agent), mix_seed(seed, kAgentStream + m)));
    }
    if (use_ddpg || use_dqn) {
      replays.push_back(std::make_unique<marl::ReplayBuffer>(
          scenario.agent.replay_capacity, scenario.agent.batch));
    }
  }

  // Reference forecasters shadow the first slice so the forecast figures
  // can compare the twin against both baselines on identical traffic.
  std::unique_ptr<twin::PersistenceForecaster> shadow_persistence;
  std::unique_ptr<twin::ArimaForecaster> shadow_arima;
  if (use_twin && scenario.steps > 0) {
    shadow_persistence = std::make_unique<twin::PersistenceForecaster>();
    shadow_arima = std::make_unique<twin::ArimaForecaster>(1, 1, 1);
  }

  Rng explore(mix_seed(seed, kExploreStream));
  federation::CommLedger ledger;

  std::vector<PendingStep> pending(m_slices);
  std::vector<ForecastTracker> twin_err(m_slices);
  ForecastTracker persistence_err, arima_err;
  std::vector<double> prev_demand(m_slices, 0.0);
  std::vector<double> last_loss(m_slices, 0.0);

  RunArtifacts out;

  for (std::uint64_t t = 0; t < scenario.steps; ++t) {
    std::vector<double> demand_mbps(m_slices, 0.0);
    std::vector<double> demand_bps(m_slices, 0.0);
    for (std::size_t m = 0; m < m_slices; ++m) {
      demand_bps[m] = traffic::slice_demand_bps(traces[m], t);
      demand_mbps[m] = demand_bps[m] / 1e6;
    }
    if (t == 0) prev_demand = demand_mbps;

    // Forecasters observe this step, settle yesterday's prediction, train
    // online, and predict the next aggregate.
    std::vector<double> forecast(m_slices, 0.0);
    if (use_twin) {
      for (std::size_t m = 0; m < m_slices; ++m) {
        twin_err[m].settle(demand_mbps[m]);
        const std::size_t v = traces[m].nodes;
        std::span<const double> row(&traces[m].at(0, t, 0), v);
        twins[m]->push(row);
        twins[m]->train_latest();
        if (twins[m]->ready()) {
          forecast[m] = twins[m]->predict_next();
          twin_err[m].prediction = forecast[m];
          twin_err[m].has_prediction = true;
          if (m == 0) {
            out.forecasts.push_back(
                {seed, {t + 1, 0.0, forecast[m], twins[m]->id()}});
          }
        } else {
          forecast[m] = demand_mbps[m];
        }
      }
      // Shadow baselines on slice 0.
      persistence_err.settle(demand_mbps[0]);
      arima_err.settle(demand_mbps[0]);
      const std::size_t v0 = traces[0].nodes;
      std::span<const double> row0(&traces[0].at(0, t, 0), v0);
      for (twin::Forecaster* f :
           {static_cast<twin::Forecaster*>(shadow_persistence.get()),
            static_cast<twin::Forecaster*>(shadow_arima.get())}) {
        f->push(row0);
        if (f->ready()) {
          const double p = f->predict_next();
          ForecastTracker& tracker =
              f == shadow_persistence.get() ? persistence_err : arima_err;
          tracker.prediction = p;
          tracker.has_prediction = true;
          out.forecasts.push_back({seed, {t + 1, 0.0, p, f->id()}});
        }
      }
    }

    // Decide this step's allocation.
    std::vector<std::vector<double>> states(m_slices);
    std::vector<double> actions(m_slices, 0.0);
    if (allocator == alloc::AllocatorId::Netshare) {
      std::vector<double> phi_rbs(m_slices, 0.0);
      for (std::size_t m = 0; m < m_slices; ++m)
        phi_rbs[m] = radio::demand_to_rbs(demand_bps[m], scenario.radio);
      alloc_state =
          alloc::netshare_allocate(phi_rbs, total_rbs,
                                   scenario.radio.slice_cap());
    } else {
      std::vector<int> deltas(m_slices, 0);
      for (std::size_t m = 0; m < m_slices; ++m) {
        const double d_norm = demand_mbps[m] / scenario.demand_norm_mbps;
        const double companion =
            use_twin ? forecast[m] / scenario.demand_norm_mbps
                     : prev_demand[m] / scenario.demand_norm_mbps;
        const double frac = static_cast<double>(alloc_state.rbs[m]) /
                            static_cast<double>(total_rbs);
        states[m] = marl::slice_state(d_norm, companion, frac);
        if (use_ddpg) {
          actions[m] = agents[m]->select_action(
              states[m], marl::exploration_epsilon(t),
              marl::exploration_noise(t), explore);
          deltas[m] = marl::action_to_delta(actions[m], total_rbs,
                                            scenario.agent.delta_fraction);
        } else {
          const std::size_t idx = dqns[m]->select_action(
              states[m], marl::exploration_epsilon(t), explore);
          actions[m] = static_cast<double>(idx);
          deltas[m] = alloc::dqn_action_delta(idx, total_rbs);
        }
      }
      alloc_state = radio::apply_allocation(alloc_state, deltas);
    }

    const radio::StepResult result = env.step(t, alloc_state, demand_bps);

    // Complete yesterday's transitions, store them, and learn.
    if (use_ddpg || use_dqn) {
      for (std::size_t m = 0; m < m_slices; ++m) {
        if (pending[m].valid) {
          marl::Experience exp;
          exp.s = pending[m].s;
          exp.a = pending[m].a;
          exp.r = pending[m].r;
          exp.s_next = states[m];
          replays[m]->push(exp);
        }
        pending[m] = {true, states[m], actions[m],
                      result.slices[m].reward};
      }
      for (std::size_t m = 0; m < m_slices; ++m) {
        if (replays[m]->size() < scenario.agent.batch) continue;
        const auto batch = replays[m]->sample(explore);
        if (use_ddpg) {
          last_loss[m] = agents[m]->critic_update(batch);
          agents[m]->actor_update(batch);
          agents[m]->soft_update();
        } else {
          last_loss[m] = dqns[m]->update(batch);
        }
      }
    }

    // Periodic federation; the non-federated baseline reports instead.
    if (use_ddpg && federation::should_aggregate(t + 1, scenario.agg_tau)) {
      std::vector<marl::DdpgAgent*> ptrs;
      std::vector<std::size_t> sizes;
      for (std::size_t m = 0; m < m_slices; ++m) {
        ptrs.push_back(agents[m].get());
        sizes.push_back(replays[m]->size() + (pending[m].valid ? 1 : 0));
      }
      federation::run_round(ptrs, sizes, ledger);
      if (use_twin && scenario.twin.federate) {
        std::vector<twin::TwinModel*> tptrs;
        for (std::size_t m = 0; m < m_slices; ++m)
          tptrs.push_back(&twins[m]->model());
        federation::run_twin_round(tptrs, sizes, ledger);
      }
    }
    if (use_dqn) {
      for (std::size_t m = 0; m < m_slices; ++m)
        madqn_report_step(ledger, *dqns[m]);
    }

    for (std::size_t m = 0; m < m_slices; ++m) {
      MetricsRow row;
      row.t = t;
      row.slice_id = scenario.slices[m].id;
      row.allocator_id = allocator_name;
      row.seed = seed;
      row.reward = result.slices[m].reward;
      row.critic_loss = last_loss[m];
      row.omega = result.slices[m].omega_clipped;
      row.u_mean = result.slices[m].utility_mean;
      row.rmse_so_far = use_twin ? twin_err[m].rmse() : 0.0;
      row.comm_scalars = ledger.total_scalars();
      out.frame.append(std::move(row));
    }

    prev_demand = demand_mbps;
  }

  // Fill in the actuals for forecasts that resolved inside the run.
  for (SeededForecast& f : out.forecasts) {
    if (f.record.t < scenario.steps)
      f.record.actual = traffic::slice_demand_bps(traces[0], f.record.t) / 1e6;
  }
  out.forecasts.erase(
      std::remove_if(out.forecasts.begin(), out.forecasts.end(),
                     [&](const SeededForecast& f) {
                       return f.record.t >= scenario.steps;
                     }),
      out.forecasts.end());

  for (std::size_t m = 0; m < m_slices; ++m) {
    if (use_ddpg) {
      out.checkpoints.push_back(
          {scenario.slices[m].id + ".actor", agents[m]->actor_params()});
      out.checkpoints.push_back(
          {scenario.slices[m].id + ".critic", agents[m]->critic_params()});
    }
    if (use_dqn) {
      out.checkpoints.push_back(
          {scenario.slices[m].id + ".qnet", dqns[m]->params()});
    }
    if (use_twin) {
      out.checkpoints.push_back(
          {scenario.slices[m].id + ".twin", twins[m]->model().params()});
    }
  }

  log_debug("run " + allocator_name + " seed " + std::to_string(seed) +
            " finished: " + std::to_string(out.frame.rows.size()) + " rows");
  return out;
}

RunArtifacts run_experiment(const Scenario& scenario, std::uint64_t seed) {
  return run_experiment(scenario, seed,
                        alloc::allocator_from_string(scenario.allocator));
}

RunArtifacts run_all_seeds(const Scenario& scenario,
                           alloc::AllocatorId allocator) {
  RunArtifacts all;
  for (std::uint64_t seed : scenario.seeds) {
    RunArtifacts one = run_experiment(scenario, seed, allocator);
    all.frame.extend(one.frame);
    all.forecasts.insert(all.forecasts.end(), one.forecasts.begin(),
                         one.forecasts.end());
    all.checkpoints = std::move(one.checkpoints);
  }
  return all;
}

}  // namespace slicesim::exp
