#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "slicesim/core/rng.hpp"
#include "slicesim/radio/allocation.hpp"
#include "slicesim/radio/channel.hpp"
#include "slicesim/radio/environment.hpp"
#include "slicesim/radio/utility.hpp"

using namespace slicesim::radio;
using slicesim::Rng;

namespace {

std::vector<SliceSpec> two_slices(std::size_t devices = 2) {
  SliceSpec rate;
  rate.id = "embb";
  rate.kind = SliceKind::RateConstrained;
  rate.r_min_bps = 1e6;
  rate.phi = 2e-6;
  rate.device_count = devices;
  SliceSpec delay;
  delay.id = "urllc";
  delay.kind = SliceKind::DelayConstrained;
  delay.tau_max_s = 0.02;
  delay.phi = 150.0;
  delay.device_count = devices;
  delay.lambda_pkts_s = 50.0;
  return {rate, delay};
}

}  // namespace

TEST_CASE("path loss matches hand-evaluated values") {
  CHECK(path_loss_db(1.0, 1.0) == doctest::Approx(-27.55).epsilon(1e-12));
  CHECK(path_loss_db(500.0, 2000.0) == doctest::Approx(92.45).epsilon(1e-12));
  CHECK(path_loss_db(10.0, 1000.0) == doctest::Approx(52.45).epsilon(1e-12));
  CHECK_THROWS_AS(path_loss_db(0.0, 1000.0), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(10.0, -1.0), std::invalid_argument);
}

TEST_CASE("channel magnitude composes loss, shadowing and fading") {
  CHECK(channel_magnitude(0.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(channel_magnitude(20.0, 1.0, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(channel_magnitude(92.45, 1.0, 4.0) ==
        doctest::Approx(2.0 * std::pow(10.0, -4.6225)).epsilon(1e-12));
  CHECK(channel_magnitude(92.45, 1.0, 4.0) == doctest::Approx(4.776e-5).epsilon(1e-4));
}

TEST_CASE("achievable rate follows Shannon capacity") {
  CHECK(achievable_rate_bps(180e3, 1.0, 1.0, 1.0) == doctest::Approx(180e3).epsilon(1e-12));
  CHECK(achievable_rate_bps(180e3, 3.0, 1.0, 1.0) == doctest::Approx(360e3).epsilon(1e-12));
  CHECK(achievable_rate_bps(0.0, 5.0, 1.0, 1.0) == 0.0);

  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double w = rng.uniform(1e3, 1e7);
    const double g = rng.uniform(1e-12, 1e-6);
    const double r0 = achievable_rate_bps(w, 1.0, g, 1e-12);
    CHECK(achievable_rate_bps(w * 1.5, 1.0, g, 1e-12 * 1.5) >= r0);
    CHECK(achievable_rate_bps(w, 1.0, g * 2.0, 1e-12) >= r0);
  }
}

TEST_CASE("average delay is the M/M/1 sojourn time with saturation cap") {
  CHECK(average_delay_s(2.0 * 1.0, 1.0, 1.0, 10.0) == doctest::Approx(1.0));
  CHECK(average_delay_s(11.0, 1.0, 1.0, 10.0) == doctest::Approx(0.1));
  CHECK(average_delay_s(0.5, 1.0, 1.0, 10.0) == 10.0);
  CHECK(average_delay_s(0.0, 3.0, 1.0, 10.0) == 10.0);
}

TEST_CASE("sigmoid utilities hit their anchor points") {
  CHECK(rate_utility(5.0, 5.0, 3.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rate_utility(std::log(3.0), 0.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(delay_utility(0.02, 0.02, 150.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(delay_utility(0.0, 1.0, 50.0) == doctest::Approx(1.0).epsilon(1e-6));

  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    const double phi = rng.uniform(0.1, 3.0);
    const double a = rng.uniform(-5.0, 5.0), b = rng.uniform(-5.0, 5.0);
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double ur_lo = rate_utility(lo, 0.0, phi);
    const double ur_hi = rate_utility(hi, 0.0, phi);
    CHECK(ur_lo > 0.0);
    CHECK(ur_hi < 1.0);
    CHECK(ur_lo <= ur_hi);
    CHECK(delay_utility(lo, 0.0, phi) >= delay_utility(hi, 0.0, phi));
  }
}

TEST_CASE("slice utility sums and averages") {
  std::vector<double> u{0.5, 0.5};
  SliceUtility s = slice_utility(u);
  CHECK(s.sum == doctest::Approx(1.0));
  CHECK(s.mean == doctest::Approx(0.5));

  std::vector<double> mixed{0.25, 0.75};
  s = slice_utility(mixed);
  CHECK(s.sum == doctest::Approx(1.0));
  CHECK(s.mean == doctest::Approx(0.5));

  std::vector<double> full(7, 1.0);
  CHECK(slice_utility(full).sum == doctest::Approx(7.0));

  std::vector<double> empty;
  CHECK_THROWS_AS(slice_utility(empty), std::invalid_argument);
}

TEST_CASE("utilization raw and clipped forms") {
  CHECK(utilization_raw(25, 50) == doctest::Approx(0.5));
  CHECK(utilization_raw(30, 30) == doctest::Approx(1.0));
  CHECK(utilization_clipped(30, 30) == doctest::Approx(1.0));
  CHECK(utilization_raw(50, 25) == doctest::Approx(2.0));
  CHECK(utilization_clipped(50, 25) == doctest::Approx(0.5));
  CHECK(utilization_raw(10, 0) == 0.0);
  CHECK(utilization_clipped(10, 0) == 0.0);
}

TEST_CASE("reward combines clipped utilization and mean utility") {
  CHECK(reward(1.0, 1.0, 0.5, 0.5) == doctest::Approx(1.0));
  CHECK(reward(0.3, 0.9, 1.0, 0.0) == doctest::Approx(0.3));
  CHECK(reward(0.5, 0.5, 0.5, 0.5) == doctest::Approx(0.5));

  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    const double r = reward(rng.uniform01(), rng.uniform01(), 0.5, 0.5);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("apply_allocation projects onto the feasible set") {
  AllocationState st;
  st.rbs = {20, 20};
  st.kappa = 50;
  st.total_rbs = 50;

  SUBCASE("proportional scaling on oversubscription") {
    std::vector<int> deltas{10, 10};
    AllocationState next = apply_allocation(st, deltas);
    CHECK(next.rbs == std::vector<int>{25, 25});
    CHECK(next.feasible());
  }
  SUBCASE("feasible requests pass through") {
    st.rbs = {10, 20};
    std::vector<int> deltas{0, 0};
    AllocationState next = apply_allocation(st, deltas);
    CHECK(next.rbs == std::vector<int>{10, 20});
  }
  SUBCASE("grants never fall below one RB") {
    std::vector<int> deltas{-100, 5};
    AllocationState next = apply_allocation(st, deltas);
    CHECK(next.rbs[0] == 1);
    CHECK(next.feasible());
  }
  SUBCASE("fuzzed deltas always yield a valid state") {
    Rng rng(123);
    AllocationState cur;
    cur.rbs = {8, 9, 8, 8, 8, 9};
    cur.kappa = 50;
    cur.total_rbs = 50;
    for (int step = 0; step < 2000; ++step) {
      std::vector<int> deltas(cur.rbs.size());
      for (int& d : deltas)
        d = static_cast<int>(rng.below(41)) - 20;
      cur = apply_allocation(cur, deltas);
      CHECK(cur.feasible());
    }
  }
}

TEST_CASE("environment step handles degenerate and saturated demand") {
  RadioConfig cfg;
  Environment env(cfg, two_slices(), 99);
  AllocationState alloc = env.initial_allocation();
  REQUIRE(alloc.rbs.size() == 2);
  CHECK(alloc.rbs[0] + alloc.rbs[1] == 50);

  SUBCASE("zero demand everywhere") {
    std::vector<double> demand{0.0, 0.0};
    StepResult r = env.step(0, alloc, demand);
    for (const SliceStep& s : r.slices) {
      CHECK(s.phi_rbs == 0);
      CHECK(s.omega_raw == 0.0);
      CHECK(s.omega_clipped == 0.0);
      CHECK(s.utility_sum == 0.0);
      CHECK(s.utility_mean == 1.0);
      CHECK(s.reward == doctest::Approx(cfg.mu_weight * 1.0));
    }
  }
  SUBCASE("generous demand saturates utilization") {
    SliceSpec one;
    one.id = "only";
    one.r_min_bps = 1e6;
    one.phi = 1e-6;
    one.device_count = 3;
    Environment solo(cfg, {one}, 7);
    AllocationState full;
    full.rbs = {50};
    full.kappa = 50;
    full.total_rbs = 50;
    std::vector<double> demand{100e6};
    StepResult r = solo.step(0, full, demand);
    CHECK(r.slices[0].omega_clipped == doctest::Approx(1.0));
    CHECK(r.slices[0].phi_rbs >= 50);
  }
  SUBCASE("missing demand throws") {
    std::vector<double> demand{1e6};
    CHECK_THROWS_AS(env.step(0, alloc, demand), std::invalid_argument);
  }
}

TEST_CASE("episode trace is bit-identical for a fixed seed") {
  RadioConfig cfg;
  std::vector<double> demand{8e6, 4e6};
  Environment a(cfg, two_slices(3), 2024), b(cfg, two_slices(3), 2024);
  AllocationState alloc = a.initial_allocation();
  for (std::uint64_t t = 0; t < 20; ++t) {
    StepResult ra = a.step(t, alloc, demand);
    StepResult rb = b.step(t, alloc, demand);
    for (std::size_t m = 0; m < ra.slices.size(); ++m) {
      CHECK(ra.slices[m].reward == rb.slices[m].reward);
      CHECK(ra.slices[m].device_rates_bps == rb.slices[m].device_rates_bps);
      CHECK(ra.slices[m].device_delays_s == rb.slices[m].device_delays_s);
    }
  }
  Environment c(cfg, two_slices(3), 2025);
  StepResult rc = c.step(0, alloc, demand);
  StepResult ra = a.step(0, alloc, demand);
  CHECK(rc.slices[0].device_rates_bps != ra.slices[0].device_rates_bps);
}

TEST_CASE("step draws do not depend on step history") {
  RadioConfig cfg;
  std::vector<double> demand{8e6, 4e6};
  Environment a(cfg, two_slices(), 5), b(cfg, two_slices(), 5);
  AllocationState alloc = a.initial_allocation();
  for (std::uint64_t t = 0; t < 5; ++t) a.step(t, alloc, demand);
  StepResult ra = a.step(9, alloc, demand);
  StepResult rb = b.step(9, alloc, demand);
  CHECK(ra.slices[1].device_rates_bps == rb.slices[1].device_rates_bps);
}
