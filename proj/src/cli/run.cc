// Copyright 2026 The FILM Simulator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "film/cli.h"
#include "film/error.h"

namespace film::cli {

int RunCli(int argc, char** argv) {
  CLI::App app{"Federated language-model training simulator and "
               "gradient-leakage attack toolkit",
               "film"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  app.add_option("--config", config_path, "Experiment config file");
  app.add_option("--seed", seed, "Override the experiment seed");
  app.add_option("--out", out, "Output directory");
  app.add_option("--jobs", jobs, "Worker threads for independent attacks")
      ->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "Train and record a transcript");
  auto* attack = app.add_subcommand("attack", "Attack transcript entries");
  auto* sweep = app.add_subcommand("sweep", "Vary one setting and re-attack");
  auto* rescore = app.add_subcommand("metrics", "Re-score existing results");
  std::optional<std::string> transcript, axis, results;
  attack->add_option("--transcript", transcript, "Transcript directory");
  sweep->add_option("--transcript", transcript, "Transcript directory");
  sweep->add_option("--axis", axis,
                    "batch_size|iteration|beam_size|ngram|beta|prune_ratio|sigma");
  rescore->add_option("--results", results, "Directory holding results.jsonl");
  rescore->add_option("--transcript", transcript, "Transcript directory");
  for (auto* sub : {train, attack, sweep, rescore}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    ExperimentConfig config =
        config_path.empty() ? ExperimentConfig{} : LoadConfig(config_path);
    if (seed) config.seed = *seed;
    if (out) config.out = *out;
    if (jobs) config.jobs = *jobs;
    if (transcript) config.transcript = *transcript;
    if (axis) config.sweep_axis = *axis;
    if (results) config.metrics_results = *results;

    if (train->parsed()) {
      CmdTrain(config);
    } else if (attack->parsed()) {
      CmdAttack(config);
    } else if (sweep->parsed()) {
      CmdSweep(config);
    } else {
      CmdMetrics(config);
    }
  } catch (const Error& e) {
    std::cerr << "film: " << e.what() << "\n";
    return e.code() == ErrorCode::kNumericalFailure ? kExitNumerical
                                                    : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "film: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

}  // namespace film::cli
