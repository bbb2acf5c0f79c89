#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/alloc/baselines.hpp"
#include "slicesim/exp/metrics.hpp"
#include "slicesim/exp/scenario.hpp"
#include "slicesim/nn/param_vector.hpp"

namespace slicesim::exp {

struct Checkpoint {
  std::string name;  // e.g. "embb-0.actor"
  nn::ParamVector params;
};

struct RunArtifacts {
  MetricsFrame frame;
  std::vector<SeededForecast> forecasts;  // first slice, twin runs only
  std::vector<Checkpoint> checkpoints;
};

// One fully deterministic episode: traffic generation, online twin
// training, the allocator loop, and federation on its period, logging one
// row per slice per step.
RunArtifacts run_experiment(const Scenario& scenario, std::uint64_t seed,
                            alloc::AllocatorId allocator);

// Allocator taken from the scenario.
RunArtifacts run_experiment(const Scenario& scenario, std::uint64_t seed);

// All scenario seeds in order; frames and forecasts concatenated,
// checkpoints from the last seed.
RunArtifacts run_all_seeds(const Scenario& scenario,
                           alloc::AllocatorId allocator);

}  // namespace slicesim::exp
