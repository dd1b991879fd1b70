// Copyright 2026 The hpf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hpf/harness.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFault = 2;
}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Leader-following simulation and path reconstruction"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  auto * run_cmd = app.add_subcommand("run", "Run a scenario and write the run outputs");
  run_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--override", overrides, "Scenario override key=value (repeatable)");

  std::string run_path;
  auto * metrics_cmd = app.add_subcommand("metrics", "Recompute and print metrics from run.json");
  metrics_cmd->add_option("run", run_path, "run.json")->required();

  std::string plot_run;
  std::string plot_out;
  auto * plot_cmd = app.add_subcommand("plotdata", "Write plot CSVs and spline.json from run.json");
  plot_cmd->add_option("run", plot_run, "run.json")->required();
  plot_cmd->add_option("--out", plot_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) {
      if (seed) {
        overrides.push_back("seed=" + std::to_string(*seed));
      }
      const hpf::Scenario scenario = hpf::load_scenario(scenario_path, overrides);
      const hpf::RunLog log = hpf::run(scenario);
      hpf::write_outputs(log, out_dir);
      const hpf::Metrics m = hpf::compute_metrics(log);
      std::cout << hpf::metrics_to_json(m).dump(2) << '\n';
      if (log.status == hpf::RunStatus::Fault) {
        std::cerr << "run ended with Fault: " << log.fault_reason << '\n';
        return kFault;
      }
      return kOk;
    }
    if (*metrics_cmd) {
      const hpf::RunLog log = hpf::read_runlog(run_path);
      std::cout << hpf::metrics_to_json(hpf::compute_metrics(log)).dump(2) << '\n';
      return log.status == hpf::RunStatus::Fault ? kFault : kOk;
    }
    if (*plot_cmd) {
      const hpf::RunLog log = hpf::read_runlog(plot_run);
      hpf::write_plot_data(log, plot_out);
      return kOk;
    }
  } catch (const hpf::ScenarioError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
