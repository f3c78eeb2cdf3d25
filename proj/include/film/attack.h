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

// Sentence recovery from an observed federated update:
//
//   1. bag of words from the nonzero rows of the word-embedding gradient,
//      maximum length from the nonzero rows of the position-embedding
//      gradient;
//   2. beam search over bag tokens, scored by the observed model's
//      log-likelihood minus an n-gram repetition penalty;
//   3. greedy phrase- and token-level reordering under the prior score
//      perplexity + beta * ||grad||.
//
// Every operation is a pure function of its inputs and seeds.

#ifndef FILM_ATTACK_H_
#define FILM_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "film/corpus.h"
#include "film/fedsim.h"
#include "film/model.h"
#include "film/tensor.h"

namespace film::attack {

using corpus::TokenId;
using TokenSeq = std::vector<TokenId>;

struct BagOfWords {
  std::vector<TokenId> token_ids;  // sorted, unique, never kPadId
  std::size_t source_iteration = 0;

  bool empty() const { return token_ids.empty(); }
  std::size_t size() const { return token_ids.size(); }
  bool contains(TokenId id) const;
};

struct ExtractionMode {
  enum class Kind { kExact, kThreshold };
  Kind kind = Kind::kExact;
  double threshold = 0.0;

  static ExtractionMode Exact() { return {}; }
  static ExtractionMode Threshold(double tau) {
    return {Kind::kThreshold, tau};
  }
};

// Exact: rows with any nonzero entry. Threshold: rows whose largest absolute
// entry exceeds tau. The pad row is always excluded.
BagOfWords ExtractBagOfWords(const Tensor& grad_word_embeddings,
                             ExtractionMode mode = ExtractionMode::Exact(),
                             std::size_t iteration = 0);

// 1 + index of the last nonzero row (positions include <bos>); 0 if none.
std::size_t ExtractMaxLength(const Tensor& grad_position_embeddings);

// sigma * sqrt(2 ln d).
double DpsgdThreshold(double sigma, std::size_t hidden_dim);
BagOfWords DpsgdBowAttack(const Tensor& grad_word_embeddings, double sigma,
                          std::size_t hidden_dim, std::size_t iteration = 0);

// Bag tokens whose text starts with an uppercase letter; the whole bag when
// there are none and `fallback` is set. Specials are never prompts.
std::vector<TokenId> SelectPrompts(const BagOfWords& bag,
                                   const corpus::Vocab& vocab, bool fallback);

// Positions i whose n-gram (ending at i) already occurred earlier.
std::size_t NgramRepeatCount(std::span<const TokenId> tokens, std::size_t n);

// Multiset of n-grams (of any order) penalised during beam search.
class BannedGrams {
 public:
  void Add(std::span<const TokenId> gram);
  // Adds every `order`-gram of `tokens`; a shorter sequence is banned whole.
  void AddAllFrom(std::span<const TokenId> tokens, std::size_t order);
  // Sum over windows of `tokens` of the banned multiplicity of that window.
  std::size_t CountIn(std::span<const TokenId> tokens) const;
  bool empty() const { return grams_.empty(); }

 private:
  std::map<TokenSeq, std::size_t> grams_;
  std::map<std::size_t, std::size_t> orders_;  // order -> number of grams
};

// log P(tokens) - rho * (R_n(tokens) + banned.CountIn(tokens)).
double BeamScore(std::span<const TokenId> tokens,
                 const model::ModelParams& params, double rho, std::size_t n,
                 const BannedGrams& banned = {});

struct BeamSearchConfig {
  std::size_t beam_size = 32;
  std::size_t max_length = 40;
  std::size_t ngram = 2;
  double penalty = 1.0;
  bool prompt_fallback = true;
  // Optional per-token usage caps (known word frequencies).
  std::optional<std::map<TokenId, std::size_t>> token_caps;

  void Validate() const;
};

struct Beam {
  TokenSeq tokens;
  double log_prob = 0.0;
  double score = 0.0;  // BeamScore of tokens
};

// Beams seeded from `prompts` and extended one bag token at a time up to
// max_length, keeping the top beam_size by score (ties: lexicographically
// smaller token ids first). Output is ordered best first by score / length.
std::vector<Beam> BeamSearch(const BagOfWords& bag,
                             std::span<const TokenId> prompts,
                             const model::ModelParams& params,
                             const BeamSearchConfig& config,
                             const BannedGrams& banned = {});

// Perplexity + beta * global L2 norm of the single-sentence loss gradient.
// Lower is better.
double PriorScore(std::span<const TokenId> tokens,
                  const model::ModelParams& params, double beta);

// Cuts after the first `.`, `?` or `!` when that lowers the prior score.
TokenSeq TruncateAtPunctuation(std::span<const TokenId> tokens,
                               const model::ModelParams& params, double beta,
                               const corpus::Vocab& vocab);

struct ReorderConfig {
  double beta = 1.0;
  std::size_t steps_per_stage = 200;
  std::size_t cuts = 2;
  std::size_t candidates_per_step = 32;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Incumbent prior score after each reorder step (initial score first).
struct ReorderTrace {
  std::vector<double> incumbent_scores;
};

TokenSeq PhraseReorder(std::span<const TokenId> tokens,
                       const model::ModelParams& params,
                       const ReorderConfig& config,
                       ReorderTrace* trace = nullptr);

TokenSeq TokenReorder(std::span<const TokenId> tokens, const BagOfWords& bag,
                      const model::ModelParams& params,
                      const ReorderConfig& config,
                      ReorderTrace* trace = nullptr);

struct RecoveredSentence {
  std::size_t rank = 0;
  TokenSeq tokens;
  double prior_score = 0.0;
  double beam_score = 0.0;
};

struct AttackResult {
  std::size_t iteration = 0;
  BagOfWords bag;
  std::size_t recovered_max_length = 0;
  // Best (reordered) sentence first, then the raw runner-up beams.
  std::vector<RecoveredSentence> recovered;
  BeamSearchConfig beam_config;
  ReorderConfig reorder_config;

  const RecoveredSentence& best() const { return recovered.front(); }
};

struct AttackOptions {
  BeamSearchConfig beam;
  ReorderConfig reorder;
  ExtractionMode extraction;
  // Skip scoring runner-up beams with the prior (cheaper experiments).
  bool score_runner_ups = true;
};

// Throws EmptyBag when the update reveals no tokens (e.g. frozen embeddings).
AttackResult RecoverSingle(const fedsim::ObservedUpdate& update,
                           const corpus::Vocab& vocab,
                           const AttackOptions& options,
                           const BannedGrams& banned = {});

// `repetitions` recoveries; after each, the ban_order-grams of the recovered
// sentence are banned for later searches. Repetition r reorders with seed
// options.reorder.seed + r.
std::vector<AttackResult> RecoverMultiple(const fedsim::ObservedUpdate& update,
                                          const corpus::Vocab& vocab,
                                          const AttackOptions& options,
                                          std::size_t repetitions,
                                          std::size_t ban_order = 4);

}  // namespace film::attack

#endif  // FILM_ATTACK_H_
