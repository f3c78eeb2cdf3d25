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

// One-server, one-client federated training with client-side defenses and a
// record of what an eavesdropper on the channel sees.

#ifndef FILM_FEDSIM_H_
#define FILM_FEDSIM_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "film/corpus.h"
#include "film/model.h"

namespace film::fedsim {

enum class DefenseKind { kNone, kPrune, kDpsgd, kFreezeEmbeddings };

struct DefenseConfig {
  DefenseKind kind = DefenseKind::kNone;
  double prune_ratio = 0.0;  // kPrune: fraction p in [0, 1)
  double clip_norm = 1.0;    // kDpsgd: C > 0
  double noise_scale = 0.0;  // kDpsgd: sigma >= 0

  static DefenseConfig None() { return {}; }
  static DefenseConfig Prune(double ratio);
  static DefenseConfig Dpsgd(double clip, double sigma);
  static DefenseConfig FreezeEmbeddings();

  void Validate() const;
};

// Zeroes the floor(p * total) entries of smallest magnitude across all
// tensors; ties go to the earlier tensor, then the lower flat index.
model::Gradients ApplyGradientPruning(const model::Gradients& grads,
                                      double ratio);

// Clips each example to global L2 norm `clip`, averages, and adds
// N(0, sigma^2 clip^2 / b^2) to every entry.
model::Gradients ApplyDpsgd(std::span<const model::Gradients> per_example,
                            double clip, double sigma, Rng& rng);

// Word and position embedding gradients are withheld (all zeros).
model::Gradients ApplyFreeze(const model::Gradients& grads);

// What an eavesdropper observes at one iteration: the broadcast parameters
// and the gradients the client transmitted.
struct ObservedUpdate {
  std::size_t iteration = 0;
  const model::ModelParams* params = nullptr;
  const model::Gradients* transmitted = nullptr;
};

struct TranscriptEntry {
  std::size_t iteration = 0;
  model::ModelParams params;
  model::Gradients transmitted;
  // Ground truth kept for scoring only; attack code receives ObservedUpdate.
  std::optional<corpus::Batch> eval_only_batch;

  ObservedUpdate observed() const { return {iteration, &params, &transmitted}; }
};

struct Transcript {
  model::Hyperparams hyper;
  model::TrainConfig train_config;
  DefenseConfig defense;
  std::vector<TranscriptEntry> entries;
};

struct ClientUpdate {
  double loss = 0.0;
  model::Gradients transmitted;
};

// The client's side of one round: gradients on `batch` at `params`, with the
// defense applied.
ClientUpdate ComputeClientUpdate(const model::ModelParams& params,
                                 const corpus::Batch& batch,
                                 const DefenseConfig& defense, Rng& rng);

// Builds the entry an eavesdropper would record for `batch` at `params`.
TranscriptEntry Observe(const model::ModelParams& params,
                        const corpus::Batch& batch, std::size_t iteration,
                        const DefenseConfig& defense, Rng& rng);

struct TrainingRun {
  model::ModelParams final_params;
  Transcript transcript;
  std::vector<double> loss_curve;  // one client loss per iteration
};

// Runs train_config.iterations rounds from `initial`. Entries are captured at
// every iteration t with t % capture_every == 0 and at the last iteration.
TrainingRun RunTraining(const corpus::Corpus& corpus,
                        model::ModelParams initial,
                        const model::TrainConfig& train_config,
                        const DefenseConfig& defense,
                        std::size_t capture_every);

// Same, with parameters initialised from train_config.seed.
TrainingRun RunTraining(const corpus::Corpus& corpus,
                        const model::Hyperparams& hyper,
                        const model::TrainConfig& train_config,
                        const DefenseConfig& defense,
                        std::size_t capture_every);

}  // namespace film::fedsim

#endif  // FILM_FEDSIM_H_
