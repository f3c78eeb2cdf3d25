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

// Experiment driver behind the `film` command line tool.
//
// Configs are flat `key = value` files with `#` comments; keys are grouped by
// dotted prefixes (corpus., model., train., defense., beam., reorder.,
// attack., sweep., metrics.). Every output directory receives a
// `config.resolved` echo listing all keys, defaulted ones included.

#ifndef FILM_CLI_H_
#define FILM_CLI_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "film/attack.h"
#include "film/fedsim.h"
#include "film/model.h"

namespace film::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out = "film_out";
  std::size_t jobs = 1;

  std::string corpus_train;
  std::string corpus_vocab;  // existing vocab file; built from corpus if empty
  std::size_t corpus_vocab_size = 8192;

  model::Hyperparams hyper;  // vocab_size comes from the vocabulary
  model::TrainConfig train;
  std::size_t capture_every = 1000;
  fedsim::DefenseConfig defense;

  attack::BeamSearchConfig beam;
  bool beam_oracle_caps = false;
  attack::ReorderConfig reorder;

  std::string transcript;                    // attack/sweep input
  std::vector<std::size_t> attack_iterations;  // empty: every entry
  // Empty: attack the recorded training batches. Otherwise draw
  // attack_probes fresh batches of each size at each scheduled entry.
  std::vector<std::size_t> attack_batch_sizes;
  std::size_t attack_probes = 1;
  std::size_t repetitions = 1;
  std::size_t ban_order = 4;
  double match_threshold = 0.25;
  std::string extraction = "auto";  // auto | exact | threshold
  double tau = 0.0;
  bool score_runner_ups = true;

  std::string sweep_axis;
  std::vector<double> sweep_values;
  std::size_t sweep_probes = 4;
  std::size_t sweep_batch_size = 16;
  std::int64_t sweep_iteration = -1;  // -1: last entry

  std::string metrics_results;  // attack output to re-score; default `out`

  void Validate() const;
};

// Throws ConfigError on unknown keys and malformed values.
ExperimentConfig ParseConfig(std::string_view text,
                             const std::string& origin = "<config>");
ExperimentConfig LoadConfig(const std::filesystem::path& path);
// Every key in a fixed order, one `key = value` line each.
std::string ConfigToText(const ExperimentConfig& config);

void CmdTrain(const ExperimentConfig& config);
void CmdAttack(const ExperimentConfig& config);
void CmdSweep(const ExperimentConfig& config);
void CmdMetrics(const ExperimentConfig& config);

// Parses arguments, runs a subcommand and maps errors to exit codes.
int RunCli(int argc, char** argv);

}  // namespace film::cli

#endif  // FILM_CLI_H_
