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

#include "film/fedsim.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "film/error.h"

namespace film::fedsim {

DefenseConfig DefenseConfig::Prune(double ratio) {
  DefenseConfig c;
  c.kind = DefenseKind::kPrune;
  c.prune_ratio = ratio;
  c.Validate();
  return c;
}

DefenseConfig DefenseConfig::Dpsgd(double clip, double sigma) {
  DefenseConfig c;
  c.kind = DefenseKind::kDpsgd;
  c.clip_norm = clip;
  c.noise_scale = sigma;
  c.Validate();
  return c;
}

DefenseConfig DefenseConfig::FreezeEmbeddings() {
  DefenseConfig c;
  c.kind = DefenseKind::kFreezeEmbeddings;
  return c;
}

void DefenseConfig::Validate() const {
  if (kind == DefenseKind::kPrune && !(prune_ratio >= 0.0 && prune_ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "prune ratio must be in [0, 1)");
  }
  if (kind == DefenseKind::kDpsgd &&
      (!(clip_norm > 0.0) || !(noise_scale >= 0.0))) {
    throw Error(ErrorCode::kInvalidInput,
                "DPSGD needs clip norm > 0 and noise scale >= 0");
  }
}

model::Gradients ApplyGradientPruning(const model::Gradients& grads,
                                      double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "prune ratio must be in [0, 1)");
  }
  model::Gradients out = grads;
  const std::size_t total = grads.tensors.total_size();
  // The epsilon absorbs representation error in products like 0.29 * 100.
  const auto n_prune = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(total) + 1e-9));
  if (n_prune == 0) return out;

  struct Entry {
    double magnitude;
    std::size_t tensor;
    std::size_t index;
  };
  std::vector<Entry> entries;
  entries.reserve(total);
  for (std::size_t t = 0; t < grads.tensors.count(); ++t) {
    const auto& data = grads.tensors.at(t).data;
    for (std::size_t i = 0; i < data.size(); ++i) {
      entries.push_back({std::abs(data[i]), t, i});
    }
  }
  auto smaller = [](const Entry& a, const Entry& b) {
    if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
    if (a.tensor != b.tensor) return a.tensor < b.tensor;
    return a.index < b.index;
  };
  std::nth_element(entries.begin(),
                   entries.begin() + static_cast<std::ptrdiff_t>(n_prune - 1),
                   entries.end(), smaller);
  for (std::size_t k = 0; k < n_prune; ++k) {
    out.tensors.at(entries[k].tensor).data[entries[k].index] = 0.0;
  }
  return out;
}

model::Gradients ApplyDpsgd(std::span<const model::Gradients> per_example,
                            double clip, double sigma, Rng& rng) {
  if (per_example.empty()) {
    throw Error(ErrorCode::kInvalidInput, "DPSGD needs at least one example");
  }
  if (!(clip > 0.0) || !(sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput,
                "DPSGD needs clip norm > 0 and noise scale >= 0");
  }
  model::Gradients out{per_example.front().tensors.ZerosLike()};
  for (const auto& g : per_example) {
    const double norm = g.tensors.GlobalL2Norm();
    const double factor = norm > clip ? clip / norm : 1.0;
    out.tensors.AddScaled(g.tensors, factor);
  }
  const double b = static_cast<double>(per_example.size());
  out.tensors.Scale(1.0 / b);
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma * clip / b);
    for (auto& t : out.tensors.tensors()) {
      for (double& v : t.data) v += noise(rng);
    }
  }
  return out;
}

model::Gradients ApplyFreeze(const model::Gradients& grads) {
  model::Gradients out = grads;
  for (auto* t : {&out.word_embeddings(), &out.position_embeddings()}) {
    std::fill(t->data.begin(), t->data.end(), 0.0);
  }
  return out;
}

ClientUpdate ComputeClientUpdate(const model::ModelParams& params,
                                 const corpus::Batch& batch,
                                 const DefenseConfig& defense, Rng& rng) {
  defense.Validate();
  ClientUpdate update;
  if (defense.kind == DefenseKind::kDpsgd) {
    auto per_example = model::PerExampleGradients(params, batch);
    std::vector<model::Gradients> grads;
    grads.reserve(per_example.size());
    double loss = 0.0;
    for (auto& e : per_example) {
      loss += e.loss;
      grads.push_back(std::move(e.grads));
    }
    update.loss = loss / static_cast<double>(grads.size());
    update.transmitted =
        ApplyDpsgd(grads, defense.clip_norm, defense.noise_scale, rng);
    return update;
  }
  auto result = model::ComputeLossAndGradients(params, batch);
  update.loss = result.loss;
  switch (defense.kind) {
    case DefenseKind::kPrune:
      update.transmitted = ApplyGradientPruning(result.grads, defense.prune_ratio);
      break;
    case DefenseKind::kFreezeEmbeddings:
      update.transmitted = ApplyFreeze(result.grads);
      break;
    default:
      update.transmitted = std::move(result.grads);
      break;
  }
  return update;
}

TranscriptEntry Observe(const model::ModelParams& params,
                        const corpus::Batch& batch, std::size_t iteration,
                        const DefenseConfig& defense, Rng& rng) {
  auto update = ComputeClientUpdate(params, batch, defense, rng);
  return TranscriptEntry{iteration, params, std::move(update.transmitted),
                         batch};
}

TrainingRun RunTraining(const corpus::Corpus& corpus,
                        model::ModelParams initial,
                        const model::TrainConfig& train_config,
                        const DefenseConfig& defense,
                        std::size_t capture_every) {
  train_config.Validate();
  defense.Validate();
  if (capture_every == 0) {
    throw Error(ErrorCode::kInvalidInput, "capture_every must be >= 1");
  }
  const bool frozen = train_config.freeze_embeddings ||
                      defense.kind == DefenseKind::kFreezeEmbeddings;
  model::TrainConfig server_config = train_config;
  server_config.freeze_embeddings = frozen;

  // Batch sampling and defense noise draw from separate streams so that
  // toggling a defense does not change which batches are visited.
  Rng batch_rng(train_config.seed ^ 0xD1B54A32D192ED03ULL);
  Rng noise_rng(train_config.seed ^ 0x9E3779B97F4A7C15ULL);

  TrainingRun run;
  run.transcript.hyper = initial.hyper;
  run.transcript.train_config = train_config;
  run.transcript.defense = defense;
  model::ModelParams params = std::move(initial);
  model::OptimizerState state;
  const std::size_t T = train_config.iterations;
  for (std::size_t t = 0; t < T; ++t) {
    corpus::Batch batch =
        corpus::SampleBatch(corpus, train_config.batch_size, batch_rng);
    ClientUpdate update = ComputeClientUpdate(params, batch, defense, noise_rng);
    if (frozen && defense.kind != DefenseKind::kFreezeEmbeddings) {
      update.transmitted = ApplyFreeze(update.transmitted);
    }
    run.loss_curve.push_back(update.loss);
    if (t % capture_every == 0 || t + 1 == T) {
      run.transcript.entries.push_back(
          TranscriptEntry{t, params, update.transmitted, std::move(batch)});
    }
    params = model::ApplyUpdate(params, update.transmitted, server_config, state);
  }
  run.final_params = std::move(params);
  return run;
}

TrainingRun RunTraining(const corpus::Corpus& corpus,
                        const model::Hyperparams& hyper,
                        const model::TrainConfig& train_config,
                        const DefenseConfig& defense,
                        std::size_t capture_every) {
  Rng init_rng(train_config.seed);
  return RunTraining(corpus, model::InitParams(hyper, init_rng), train_config,
                     defense, capture_every);
}

}  // namespace film::fedsim
