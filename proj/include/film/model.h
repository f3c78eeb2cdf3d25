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

// A small GPT-2 style language model (pre-layer-norm blocks, learned absolute
// position embeddings) with a hand-written backward pass.
//
// Sequences are conditioned on a leading <bos>. Training targets for a
// sentence x_1..x_n are x_1..x_n followed by <bos>, which doubles as the
// end-of-sentence symbol, so every sentence token is also an input and every
// position 0..n receives gradient. Untied embeddings (the default) keep the
// word-embedding gradient exactly row-sparse: only rows of tokens fed as
// inputs are nonzero.

#ifndef FILM_MODEL_H_
#define FILM_MODEL_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "film/corpus.h"
#include "film/tensor.h"

namespace film::model {

using corpus::TokenId;

struct Hyperparams {
  std::size_t vocab_size = 0;
  std::size_t hidden_dim = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t max_positions = 41;
  bool tie_embeddings = false;

  void Validate() const;
  bool operator==(const Hyperparams&) const = default;
};

inline constexpr char kWordEmbeddings[] = "wte";
inline constexpr char kPositionEmbeddings[] = "wpe";
inline constexpr char kOutputHead[] = "head.w";

struct ModelParams {
  Hyperparams hyper;
  NamedTensors tensors;

  const Tensor& word_embeddings() const { return tensors.at(0); }
  const Tensor& position_embeddings() const { return tensors.at(1); }
};

struct Gradients {
  NamedTensors tensors;

  const Tensor& word_embeddings() const { return tensors.at(0); }
  const Tensor& position_embeddings() const { return tensors.at(1); }
  Tensor& word_embeddings() { return tensors.at(0); }
  Tensor& position_embeddings() { return tensors.at(1); }
};

// Tensor names and shapes, in canonical order, for `hyper`.
std::vector<Tensor> ParameterLayout(const Hyperparams& hyper);
std::size_t ParameterCount(const Hyperparams& hyper);

// Weights ~ N(0, 0.02^2); layer-norm scales 1, offsets and biases 0.
ModelParams InitParams(const Hyperparams& hyper, Rng& rng);
ModelParams LoadParams(const Hyperparams& hyper,
                       const std::filesystem::path& path);
void SaveParams(const ModelParams& params, const std::filesystem::path& path);
// Throws CheckpointMismatch unless `tensors` matches the layout of `hyper`.
ModelParams ParamsFromTensors(const Hyperparams& hyper, NamedTensors tensors);

// Distribution of the token following `context`. The context is used
// verbatim, so callers include the leading <bos> themselves.
std::vector<double> NextTokenDist(const ModelParams& params,
                                  std::span<const TokenId> context);
// Log-probabilities for the same distribution (no exp/log round trip).
std::vector<double> NextTokenLogProbs(const ModelParams& params,
                                      std::span<const TokenId> context);

// sum_i log p(x_i | <bos>, x_1..x_{i-1}); the end symbol is not scored.
double SentenceLogProb(const ModelParams& params,
                       std::span<const TokenId> sentence);
double Perplexity(const ModelParams& params, std::span<const TokenId> sentence);

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

// Mean next-token cross-entropy over all real (non-pad) positions of the
// batch, including each row's end-of-sentence target, and its exact gradient.
// Pad positions are never evaluated.
LossAndGradients ComputeLossAndGradients(const ModelParams& params,
                                         const corpus::Batch& batch);
// Single-sentence version of the above.
LossAndGradients ComputeLossAndGradients(const ModelParams& params,
                                         std::span<const TokenId> sentence);
// Log-probability (as SentenceLogProb) and the global L2 norm of the
// single-sentence loss gradient, from one forward/backward pass.
struct SentenceScore {
  double log_prob = 0.0;
  double grad_norm = 0.0;
};
SentenceScore ScoreSentence(const ModelParams& params,
                            std::span<const TokenId> sentence);
// Per-row gradients, each of that row's mean loss (for DPSGD).
std::vector<LossAndGradients> PerExampleGradients(const ModelParams& params,
                                                  const corpus::Batch& batch);
// Loss only; used by finite-difference checks.
double ComputeLoss(const ModelParams& params, const corpus::Batch& batch);

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t iterations = 0;
  std::size_t batch_size = 16;
  bool freeze_embeddings = false;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Adam moments; unused by SGD.
struct OptimizerState {
  NamedTensors first_moment;
  NamedTensors second_moment;
  std::size_t step = 0;
};

// theta <- theta - lr * g (SGD) or one Adam step. With freeze_embeddings the
// word and position embeddings are returned untouched.
ModelParams ApplyUpdate(const ModelParams& params, const Gradients& grads,
                        const TrainConfig& config, OptimizerState& state);

}  // namespace film::model

#endif  // FILM_MODEL_H_
