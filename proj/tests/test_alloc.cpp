#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "slicesim/alloc/baselines.hpp"
#include "slicesim/radio/allocation.hpp"

using namespace slicesim;
using namespace slicesim::alloc;

namespace {

// Toy single-slice MDP for the DQN oracle: state is the current grant w in
// [1, pool], actions are the five RB deltas, reward is the negative distance
// between the next grant and a fixed demand.
struct ToyMdp {
  int pool = 50;
  int demand = 20;
  // Short horizon keeps the optimal policy myopic; with heavier discounting
  // the exact-hit states (demand reachable in one step) make a farther
  // intermediate grant worth more than the nearest one.
  double gamma = 0.5;

  int step(int w, std::size_t a) const {
    return std::clamp(w + dqn_action_delta(a, pool), 1, pool);
  }
  double reward(int w, std::size_t a) const {
    return -std::abs(step(w, a) - demand) / static_cast<double>(pool);
  }
};

// Exact tabular solution by value iteration.
std::vector<std::vector<double>> value_iterate(const ToyMdp& mdp) {
  const std::size_t n_actions = kDqnDeltaPct.size();
  std::vector<double> v(mdp.pool + 1, 0.0);
  std::vector<std::vector<double>> q(mdp.pool + 1,
                                     std::vector<double>(n_actions, 0.0));
  for (int sweep = 0; sweep < 2000; ++sweep) {
    double delta = 0.0;
    for (int w = 1; w <= mdp.pool; ++w) {
      double best = -1e300;
      for (std::size_t a = 0; a < n_actions; ++a) {
        q[w][a] = mdp.reward(w, a) + mdp.gamma * v[mdp.step(w, a)];
        best = std::max(best, q[w][a]);
      }
      delta = std::max(delta, std::abs(best - v[w]));
      v[w] = best;
    }
    if (delta < 1e-13) break;
  }
  return q;
}

std::set<std::size_t> optimal_set(const std::vector<double>& q_row) {
  const double best = *std::max_element(q_row.begin(), q_row.end());
  std::set<std::size_t> out;
  for (std::size_t a = 0; a < q_row.size(); ++a) {
    if (q_row[a] >= best - 1e-9) out.insert(a);
  }
  return out;
}

std::set<std::size_t> myopic_set(const ToyMdp& mdp, int w) {
  int best = 1 << 30;
  for (std::size_t a = 0; a < kDqnDeltaPct.size(); ++a)
    best = std::min(best, std::abs(mdp.step(w, a) - mdp.demand));
  std::set<std::size_t> out;
  for (std::size_t a = 0; a < kDqnDeltaPct.size(); ++a) {
    if (std::abs(mdp.step(w, a) - mdp.demand) == best) out.insert(a);
  }
  return out;
}

radio::AllocationState make_state(std::vector<int> rbs, int kappa, int total) {
  radio::AllocationState s;
  s.rbs = std::move(rbs);
  s.kappa = kappa;
  s.total_rbs = total;
  return s;
}

}  // namespace

TEST_CASE("allocator ids round-trip through their names") {
  CHECK(to_string(AllocatorId::DtMafl) == "dt-mafl");
  CHECK(to_string(AllocatorId::FlOnly) == "fl-only");
  CHECK(to_string(AllocatorId::Madqn) == "madqn");
  CHECK(to_string(AllocatorId::Netshare) == "netshare");
  for (AllocatorId id : kAllAllocators)
    CHECK(allocator_from_string(to_string(id)) == id);
  CHECK_THROWS_AS(allocator_from_string("round-robin"), std::invalid_argument);
}

TEST_CASE("netshare splits the pool proportionally") {
  SUBCASE("symmetric demands, symmetric split") {
    std::vector<double> demands{25.0, 25.0};
    radio::AllocationState s = netshare_allocate(demands, 50, 50);
    CHECK(s.rbs == std::vector<int>{25, 25});
    CHECK(s.feasible());
  }

  SUBCASE("largest remainder receives the spare RB") {
    std::vector<double> demands{10.0, 30.0};
    radio::AllocationState s = netshare_allocate(demands, 50, 50);
    CHECK(s.rbs == std::vector<int>{13, 37});
  }

  SUBCASE("all-zero demand falls back to an equal split") {
    std::vector<double> demands{0.0, 0.0};
    radio::AllocationState s = netshare_allocate(demands, 50, 50);
    CHECK(s.rbs == std::vector<int>{25, 25});
  }

  SUBCASE("the single largest remainder wins the spare") {
    std::vector<double> demands{10.0, 10.0, 20.0};
    radio::AllocationState s = netshare_allocate(demands, 25, 25);
    CHECK(s.rbs == std::vector<int>{6, 6, 13});
  }

  SUBCASE("a three-way remainder tie goes to the lowest index") {
    std::vector<double> demands{1.0, 1.0, 1.0};
    radio::AllocationState s = netshare_allocate(demands, 10, 10);
    CHECK(s.rbs == std::vector<int>{4, 3, 3});
  }

  SUBCASE("a zero-demand slice keeps its 1-RB floor") {
    std::vector<double> demands{0.0, 100.0};
    radio::AllocationState s = netshare_allocate(demands, 50, 50);
    CHECK(s.rbs == std::vector<int>{1, 49});
    CHECK(s.feasible());
  }

  SUBCASE("per-slice cap binds before the pool is exhausted") {
    std::vector<double> demands{1.0, 1.0, 1.0, 1.0};
    radio::AllocationState s = netshare_allocate(demands, 50, 10);
    CHECK(s.rbs == std::vector<int>{10, 10, 10, 10});
    CHECK(s.feasible());
  }

  SUBCASE("1-RB floors that overshoot a tiny pool are shaved back") {
    std::vector<double> demands(10, 0.0);
    demands[9] = 1.0;
    radio::AllocationState s = netshare_allocate(demands, 10, 10);
    CHECK(std::accumulate(s.rbs.begin(), s.rbs.end(), 0) == 10);
    CHECK(s.feasible());
  }

  SUBCASE("input validation") {
    std::vector<double> empty;
    CHECK_THROWS_AS(netshare_allocate(empty, 50, 50), std::invalid_argument);
    std::vector<double> neg{1.0, -2.0};
    CHECK_THROWS_AS(netshare_allocate(neg, 50, 50), std::invalid_argument);
    std::vector<double> ok{1.0, 1.0, 1.0};
    CHECK_THROWS_AS(netshare_allocate(ok, 2, 50), std::invalid_argument);
    CHECK_THROWS_AS(netshare_allocate(ok, 50, 0), std::invalid_argument);
  }
}

TEST_CASE("netshare always returns a feasible, pool-filling allocation") {
  Rng rng(314);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t m = 2 + rng.below(7);
    std::vector<double> demands(m, 0.0);
    bool all_positive = true;
    for (double& d : demands) {
      if (rng.uniform01() < 0.2) {
        d = 0.0;
        all_positive = false;
      } else {
        d = rng.uniform(0.1, 60.0);
      }
    }
    radio::AllocationState s = netshare_allocate(demands, 50, 50);
    CHECK(s.feasible());
    const int total = std::accumulate(s.rbs.begin(), s.rbs.end(), 0);
    CHECK(total == 50);
    if (all_positive) {
      for (std::size_t i = 0; i < m; ++i) CHECK(s.rbs[i] >= 1);
    }
  }
}

TEST_CASE("fl-only state swaps the forecast slot for the lagged actual") {
  std::vector<double> s = fl_only_state(0.4, 0.3, 0.2);
  CHECK(s == std::vector<double>{0.4, 0.3, 0.2});
  CHECK(s.size() == marl::slice_state(0.4, 0.3, 0.2).size());

  std::vector<double> flat = fl_only_state(0.7, 0.7, 0.5);
  CHECK(flat[0] == flat[1]);
}

TEST_CASE("dqn deltas quantize the pool") {
  CHECK(dqn_action_delta(0, 50) == -5);
  CHECK(dqn_action_delta(1, 50) == -3);
  CHECK(dqn_action_delta(2, 50) == 0);
  CHECK(dqn_action_delta(3, 50) == 3);
  CHECK(dqn_action_delta(4, 50) == 5);
  CHECK(dqn_action_delta(0, 20) == -2);
  CHECK(dqn_action_delta(1, 20) == -1);
  CHECK(dqn_action_delta(2, 1000) == 0);
  CHECK_THROWS_AS(dqn_action_delta(5, 50), std::invalid_argument);
}

TEST_CASE("the zero-delta action leaves an allocation unchanged") {
  radio::AllocationState s = make_state({8, 8, 8, 8, 8, 8}, 50, 50);
  std::vector<int> deltas(6, dqn_action_delta(2, 50));
  radio::AllocationState next = radio::apply_allocation(s, deltas);
  CHECK(next.rbs == s.rbs);
}

TEST_CASE("dqn action set always maps into feasible allocations") {
  Rng rng(2718);
  radio::AllocationState s = make_state({8, 8, 8, 8, 8, 8}, 50, 50);
  for (int step = 0; step < 500; ++step) {
    std::vector<int> deltas(s.rbs.size());
    for (int& d : deltas)
      d = dqn_action_delta(rng.below(kDqnDeltaPct.size()), s.total_rbs);
    s = radio::apply_allocation(s, deltas);
    CHECK(s.feasible());
  }
}

TEST_CASE("epsilon=1 selection is uniform over the five actions") {
  DqnConfig cfg;
  cfg.state_dim = 1;
  cfg.hidden = 8;
  DqnAgent agent(cfg, 5);
  Rng rng(17);
  std::vector<int> counts(5, 0);
  std::vector<double> s{0.5};
  for (int i = 0; i < 10000; ++i) ++counts[agent.select_action(s, 1.0, rng)];
  for (int c : counts) {
    CHECK(c > 1800);
    CHECK(c < 2200);
  }
  CHECK_THROWS_AS(agent.select_action(s, 1.5, rng), std::invalid_argument);
}

TEST_CASE("epsilon=0 selection is the greedy argmax") {
  DqnConfig cfg;
  cfg.state_dim = 2;
  cfg.hidden = 8;
  DqnAgent agent(cfg, 6);
  Rng rng(18);
  std::vector<double> s{0.2, 0.8};
  const std::vector<double> q = agent.q_values(s);
  const std::size_t greedy = agent.greedy_action(s);
  for (std::size_t a = 0; a < q.size(); ++a) CHECK(q[greedy] >= q[a]);
  for (int i = 0; i < 20; ++i)
    CHECK(agent.select_action(s, 0.0, rng) == greedy);
}

TEST_CASE("dqn update drives the chosen Q-value toward the TD target") {
  DqnConfig cfg;
  cfg.state_dim = 2;
  cfg.hidden = 8;
  cfg.gamma = 0.0;
  cfg.learning_rate = 0.01;
  DqnAgent agent(cfg, 7);

  marl::Experience exp;
  exp.s = {0.3, 0.6};
  exp.a = 1.0;
  exp.r = 2.0;
  exp.s_next = {0.4, 0.5};

  SUBCASE("reported loss is the squared TD error") {
    const double q_before = agent.q_values(exp.s)[1];
    std::vector<const marl::Experience*> batch{&exp};
    const double loss = agent.update(batch);
    const double err = q_before - exp.r;
    CHECK(loss == doctest::Approx(err * err).epsilon(1e-12));
  }

  SUBCASE("a perfect prediction leaves the network untouched") {
    exp.r = agent.q_values(exp.s)[1];
    const nn::ParamVector before = agent.params();
    std::vector<const marl::Experience*> batch{&exp};
    const double loss = agent.update(batch);
    CHECK(loss == 0.0);
    for (std::size_t i = 0; i < before.size(); ++i)
      CHECK(agent.params()[i] == before[i]);
  }

  SUBCASE("repeated updates on a fixed batch shrink the loss") {
    Rng rng(55);
    std::vector<marl::Experience> exps;
    for (int i = 0; i < 16; ++i) {
      marl::Experience e;
      e.s = {rng.uniform01(), rng.uniform01()};
      e.a = static_cast<double>(rng.below(5));
      e.r = rng.uniform(-1.0, 1.0);
      e.s_next = {rng.uniform01(), rng.uniform01()};
      exps.push_back(e);
    }
    std::vector<const marl::Experience*> batch;
    for (const auto& e : exps) batch.push_back(&e);
    const double first = agent.update(batch);
    double last = first;
    for (int i = 0; i < 60; ++i) last = agent.update(batch);
    CHECK(last < first);
  }

  SUBCASE("bad batches are rejected") {
    std::vector<const marl::Experience*> empty;
    CHECK_THROWS_AS(agent.update(empty), std::invalid_argument);
    exp.a = 7.0;
    std::vector<const marl::Experience*> bad{&exp};
    CHECK_THROWS_AS(agent.update(bad), std::invalid_argument);
    exp.a = 0.5;
    CHECK_THROWS_AS(agent.update(bad), std::invalid_argument);
  }
}

TEST_CASE("the target net refreshes by hard copy on its period") {
  DqnConfig cfg;
  cfg.state_dim = 1;
  cfg.hidden = 4;
  cfg.target_period = 3;
  cfg.learning_rate = 0.05;
  DqnAgent agent(cfg, 8);

  const nn::ParamVector target_init = agent.target_params();
  marl::Experience exp;
  exp.s = {0.5};
  exp.a = 0.0;
  exp.r = 1.0;
  exp.s_next = {0.5};
  std::vector<const marl::Experience*> batch{&exp};

  agent.update(batch);
  agent.update(batch);
  for (std::size_t i = 0; i < target_init.size(); ++i)
    CHECK(agent.target_params()[i] == target_init[i]);

  agent.update(batch);
  CHECK(agent.updates() == 3);
  for (std::size_t i = 0; i < target_init.size(); ++i)
    CHECK(agent.target_params()[i] == agent.params()[i]);
}

TEST_CASE("same-seed dqn agents are identical, different seeds are not") {
  DqnConfig cfg;
  cfg.state_dim = 1;
  cfg.hidden = 8;
  DqnAgent a(cfg, 77);
  DqnAgent b(cfg, 77);
  DqnAgent c(cfg, 78);
  std::vector<double> s{0.3};
  CHECK(a.q_values(s) == b.q_values(s));
  CHECK(a.q_values(s) != c.q_values(s));
}

TEST_CASE("madqn reporting charges state, reward, and model every step") {
  DqnConfig cfg;
  cfg.state_dim = 3;
  cfg.hidden = 8;
  DqnAgent agent(cfg, 9);
  federation::CommLedger ledger;
  const std::uint64_t model_scalars = agent.params().size();

  for (int step = 0; step < 3; ++step) madqn_report_step(ledger, agent);
  CHECK(ledger.messages() == 6);
  CHECK(ledger.uploaded_scalars() == 3 * (4 + model_scalars));
  CHECK(ledger.downloaded_scalars() == 0);
}

TEST_CASE("value iteration confirms the greedy delta minimizes the miss") {
  ToyMdp mdp;
  const auto q_star = value_iterate(mdp);
  for (int w = 1; w <= mdp.pool; ++w)
    CHECK(optimal_set(q_star[w]) == myopic_set(mdp, w));
}

TEST_CASE("a saturated dqn matches the tabular oracle on the toy slice") {
  ToyMdp mdp;
  const auto q_star = value_iterate(mdp);

  DqnConfig cfg;
  cfg.state_dim = 1;
  cfg.hidden = 24;
  cfg.gamma = mdp.gamma;
  cfg.learning_rate = 3e-3;
  cfg.optimizer = nn::Optimizer::Kind::Adam;
  cfg.target_period = 100;
  DqnAgent agent(cfg, 4242);

  marl::ReplayBuffer buffer(2000, 64);
  Rng rng(99);
  auto encode = [&](int w) {
    return std::vector<double>{w / static_cast<double>(mdp.pool)};
  };
  for (int iter = 0; iter < 5000; ++iter) {
    const int w = 1 + static_cast<int>(rng.below(mdp.pool));
    const std::size_t a = rng.below(kDqnDeltaPct.size());
    marl::Experience exp;
    exp.s = encode(w);
    exp.a = static_cast<double>(a);
    exp.r = mdp.reward(w, a);
    exp.s_next = encode(mdp.step(w, a));
    buffer.push(exp);
    if (buffer.size() >= 64) agent.update(buffer.sample(rng));
  }

  int matched = 0;
  for (int w = 1; w <= mdp.pool; ++w) {
    const std::set<std::size_t> best = optimal_set(q_star[w]);
    if (best.count(agent.greedy_action(encode(w))) > 0) ++matched;
  }
  CHECK(matched >= 48);
  CHECK(matched <= mdp.pool);
}
