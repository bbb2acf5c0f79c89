#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slicesim/core/log.hpp"
#include "slicesim/exp/plots.hpp"
#include "slicesim/exp/runner.hpp"
#include "slicesim/exp/scenario.hpp"

namespace fs = std::filesystem;
using namespace slicesim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitRuntime = 3;

int run_command(const std::string& scenario_path, const std::string& out_dir,
                const std::vector<std::uint64_t>& seed_override,
                const std::string& allocator_override) {
  exp::Scenario scenario = exp::load_scenario(scenario_path);
  if (!seed_override.empty()) scenario.seeds = seed_override;
  if (!allocator_override.empty()) scenario.allocator = allocator_override;
  const alloc::AllocatorId allocator =
      alloc::allocator_from_string(scenario.allocator);

  fs::create_directories(out_dir);
  const exp::RunArtifacts artifacts =
      exp::run_all_seeds(scenario, allocator);

  exp::write_metrics_csv(artifacts.frame, out_dir + "/metrics.csv");
  exp::write_summary_json(artifacts.frame, out_dir + "/summary.json");
  if (!artifacts.forecasts.empty())
    exp::write_forecasts_csv(artifacts.forecasts, out_dir + "/forecasts.csv");

  std::size_t devices = 0;
  for (const exp::SliceScenario& s : scenario.slices)
    devices = std::max(devices, s.device_count);
  nlohmann::json meta{{"scenario", scenario.name},
                      {"allocator", scenario.allocator},
                      {"devices", devices},
                      {"steps", scenario.steps},
                      {"agg_tau", scenario.agg_tau},
                      {"seeds", scenario.seeds}};
  std::ofstream meta_out(out_dir + "/meta.json");
  if (!meta_out)
    throw std::runtime_error("cannot write " + out_dir + "/meta.json");
  meta_out << meta.dump(2) << '\n';

  if (!artifacts.checkpoints.empty()) {
    const std::string ckpt_dir = out_dir + "/checkpoints";
    fs::create_directories(ckpt_dir);
    for (const exp::Checkpoint& c : artifacts.checkpoints)
      c.params.save(ckpt_dir + "/" + c.name + ".bin");
  }

  std::cout << "wrote " << artifacts.frame.rows.size() << " metric rows to "
            << out_dir << "\n";
  return kExitOk;
}

int plots_command(const std::string& runs_dir, std::string out_dir) {
  if (out_dir.empty()) out_dir = runs_dir + "/plots";
  const exp::PlotEmit emit = exp::emit_plot_data(runs_dir, out_dir);
  for (const std::string& w : emit.warnings)
    std::cerr << "warning: " << w << "\n";
  for (const std::string& f : emit.written) std::cout << "wrote " << f << "\n";
  return kExitOk;
}

int validate_command(const std::string& scenario_path) {
  exp::load_scenario(scenario_path);
  std::cout << scenario_path << ": ok\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RAN slicing experiment runner"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::string allocator;
  std::vector<std::uint64_t> seeds;

  CLI::App* run = app.add_subcommand("run", "run a scenario end to end");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seeds", seeds, "override the scenario's seed list");
  run->add_option("--allocator", allocator,
                  "override the allocator (dt-mafl, fl-only, madqn, netshare)");

  std::string runs_dir;
  std::string plots_out;
  CLI::App* plots =
      app.add_subcommand("plots", "emit figure CSVs from exported runs");
  plots->add_option("dir", runs_dir, "directory holding exported runs")
      ->required();
  plots->add_option("--out", plots_out, "plot output directory");

  std::string validate_path;
  CLI::App* validate =
      app.add_subcommand("validate", "validate a scenario file");
  validate->add_option("scenario", validate_path, "scenario JSON file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(scenario_path, out_dir, seeds, allocator);
    if (plots->parsed()) return plots_command(runs_dir, plots_out);
    if (validate->parsed()) return validate_command(validate_path);
  } catch (const exp::ScenarioError& e) {
    for (const std::string& err : e.errors()) std::cerr << err << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
