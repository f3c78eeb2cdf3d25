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

#include "film/attack.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "film/error.h"

namespace film::attack {
namespace {

bool IsSpecial(TokenId id) {
  return id == corpus::kPadId || id == corpus::kBosId;
}

// Bag tokens a sentence may be built from.
std::vector<TokenId> ContentTokens(const BagOfWords& bag) {
  std::vector<TokenId> out;
  for (TokenId id : bag.token_ids) {
    if (!IsSpecial(id)) out.push_back(id);
  }
  return out;
}

void RequireTokens(std::span<const TokenId> tokens) {
  if (tokens.empty()) {
    throw Error(ErrorCode::kInvalidInput, "token sequence must be non-empty");
  }
}

// Memoized prior scores for one reorder run.
class PriorCache {
 public:
  PriorCache(const model::ModelParams& params, double beta)
      : params_(params), beta_(beta) {}

  double operator()(const TokenSeq& tokens) {
    auto it = cache_.find(tokens);
    if (it != cache_.end()) return it->second;
    double s = PriorScore(tokens, params_, beta_);
    cache_.emplace(tokens, s);
    return s;
  }

 private:
  const model::ModelParams& params_;
  double beta_;
  std::map<TokenSeq, double> cache_;
};

// Greedy descent: each step draws candidates, keeps the best one if it is
// strictly better than the incumbent. Ties among candidates go to the first
// generated.
template <typename Propose>
TokenSeq GreedyReorder(std::span<const TokenId> tokens,
                       const model::ModelParams& params,
                       const ReorderConfig& config, Propose propose,
                       ReorderTrace* trace) {
  PriorCache score(params, config.beta);
  TokenSeq incumbent(tokens.begin(), tokens.end());
  double best = score(incumbent);
  if (trace) trace->incumbent_scores.assign(1, best);
  for (std::size_t step = 0; step < config.steps_per_stage; ++step) {
    std::optional<TokenSeq> step_best;
    double step_score = best;
    for (std::size_t c = 0; c < config.candidates_per_step; ++c) {
      std::optional<TokenSeq> cand = propose(incumbent);
      if (!cand) break;
      double s = score(*cand);
      if (s < step_score) {
        step_score = s;
        step_best = std::move(cand);
      }
    }
    if (step_best) {
      incumbent = std::move(*step_best);
      best = step_score;
    }
    if (trace) trace->incumbent_scores.push_back(best);
  }
  return incumbent;
}

std::size_t Uniform(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

bool BagOfWords::contains(TokenId id) const {
  return std::binary_search(token_ids.begin(), token_ids.end(), id);
}

BagOfWords ExtractBagOfWords(const Tensor& grad_word_embeddings,
                             ExtractionMode mode, std::size_t iteration) {
  BagOfWords bag;
  bag.source_iteration = iteration;
  const std::size_t rows = grad_word_embeddings.rows();
  const std::size_t cols = grad_word_embeddings.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    if (static_cast<TokenId>(r) == corpus::kPadId) continue;
    const double* row = grad_word_embeddings.data.data() + r * cols;
    bool hit = false;
    for (std::size_t c = 0; c < cols && !hit; ++c) {
      hit = mode.kind == ExtractionMode::Kind::kExact
                ? row[c] != 0.0
                : std::abs(row[c]) > mode.threshold;
    }
    if (hit) bag.token_ids.push_back(static_cast<TokenId>(r));
  }
  return bag;
}

std::size_t ExtractMaxLength(const Tensor& grad_position_embeddings) {
  const std::size_t rows = grad_position_embeddings.rows();
  const std::size_t cols = grad_position_embeddings.cols();
  for (std::size_t r = rows; r-- > 0;) {
    const double* row = grad_position_embeddings.data.data() + r * cols;
    if (std::any_of(row, row + cols, [](double v) { return v != 0.0; })) {
      return r + 1;
    }
  }
  return 0;
}

double DpsgdThreshold(double sigma, std::size_t hidden_dim) {
  if (!(sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "noise scale must be >= 0");
  }
  if (hidden_dim < 1) {
    throw Error(ErrorCode::kInvalidInput, "hidden dim must be >= 1");
  }
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(hidden_dim)));
}

BagOfWords DpsgdBowAttack(const Tensor& grad_word_embeddings, double sigma,
                          std::size_t hidden_dim, std::size_t iteration) {
  const double tau = DpsgdThreshold(sigma, hidden_dim);
  return ExtractBagOfWords(grad_word_embeddings,
                           ExtractionMode::Threshold(tau), iteration);
}

std::vector<TokenId> SelectPrompts(const BagOfWords& bag,
                                   const corpus::Vocab& vocab, bool fallback) {
  std::vector<TokenId> content = ContentTokens(bag);
  if (content.empty()) {
    throw Error(ErrorCode::kEmptyBag, "bag of words has no usable tokens");
  }
  std::vector<TokenId> prompts;
  for (TokenId id : content) {
    if (id == corpus::kUnkId) continue;
    const std::string& text = vocab.token(id);
    if (!text.empty() &&
        std::isupper(static_cast<unsigned char>(text.front()))) {
      prompts.push_back(id);
    }
  }
  if (prompts.empty() && fallback) return content;
  return prompts;
}

std::size_t NgramRepeatCount(std::span<const TokenId> tokens, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::kInvalidInput, "n-gram order must be >= 1");
  if (tokens.size() < n) return 0;
  std::set<TokenSeq> seen;
  std::size_t repeats = 0;
  for (std::size_t i = n - 1; i < tokens.size(); ++i) {
    TokenSeq gram(tokens.begin() + static_cast<std::ptrdiff_t>(i + 1 - n),
                  tokens.begin() + static_cast<std::ptrdiff_t>(i + 1));
    if (!seen.insert(std::move(gram)).second) ++repeats;
  }
  return repeats;
}

void BannedGrams::Add(std::span<const TokenId> gram) {
  if (gram.empty()) return;
  ++grams_[TokenSeq(gram.begin(), gram.end())];
  ++orders_[gram.size()];
}

void BannedGrams::AddAllFrom(std::span<const TokenId> tokens,
                             std::size_t order) {
  if (order < 1) throw Error(ErrorCode::kInvalidInput, "ban order must be >= 1");
  if (tokens.size() <= order) {
    Add(tokens);
    return;
  }
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    Add(tokens.subspan(i, order));
  }
}

std::size_t BannedGrams::CountIn(std::span<const TokenId> tokens) const {
  std::size_t count = 0;
  for (const auto& [order, unused] : orders_) {
    if (tokens.size() < order) break;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      auto window = tokens.subspan(i, order);
      auto it = grams_.find(TokenSeq(window.begin(), window.end()));
      if (it != grams_.end()) count += it->second;
    }
  }
  return count;
}

double BeamScore(std::span<const TokenId> tokens,
                 const model::ModelParams& params, double rho, std::size_t n,
                 const BannedGrams& banned) {
  RequireTokens(tokens);
  const double penalty = static_cast<double>(NgramRepeatCount(tokens, n) +
                                             banned.CountIn(tokens));
  return model::SentenceLogProb(params, tokens) - rho * penalty;
}

void BeamSearchConfig::Validate() const {
  if (beam_size < 1 || max_length < 1 || ngram < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "beam size, max length and n-gram order must be >= 1");
  }
  if (!(penalty >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "n-gram penalty must be >= 0");
  }
}

std::vector<Beam> BeamSearch(const BagOfWords& bag,
                             std::span<const TokenId> prompts,
                             const model::ModelParams& params,
                             const BeamSearchConfig& config,
                             const BannedGrams& banned) {
  config.Validate();
  const std::vector<TokenId> words = ContentTokens(bag);
  if (words.empty()) {
    throw Error(ErrorCode::kEmptyBag, "bag of words has no usable tokens");
  }
  std::vector<TokenId> starts;
  for (TokenId p : prompts) {
    if (!IsSpecial(p)) starts.push_back(p);
  }
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  if (starts.empty()) {
    throw Error(ErrorCode::kEmptyPrompts, "no prompts to start beams from");
  }
  const std::size_t max_length =
      std::min(config.max_length, params.hyper.max_positions - 1);
  const double rho = config.penalty;

  auto within_caps = [&](const TokenSeq& tokens, TokenId next) {
    if (!config.token_caps) return true;
    auto it = config.token_caps->find(next);
    std::size_t cap = it == config.token_caps->end() ? 0 : it->second;
    return static_cast<std::size_t>(
               std::count(tokens.begin(), tokens.end(), next)) < cap;
  };
  auto score_of = [&](const Beam& b) {
    const double penalty = static_cast<double>(
        NgramRepeatCount(b.tokens, config.ngram) + banned.CountIn(b.tokens));
    return b.log_prob - rho * penalty;
  };
  auto better = [](const Beam& a, const Beam& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  };
  auto keep_top = [&](std::vector<Beam>& beams) {
    const std::size_t k = std::min(config.beam_size, beams.size());
    std::partial_sort(beams.begin(), beams.begin() + static_cast<std::ptrdiff_t>(k),
                      beams.end(), better);
    beams.resize(k);
  };

  const TokenId bos = corpus::kBosId;
  std::vector<Beam> beams;
  {
    const std::vector<double> first = model::NextTokenLogProbs(params, {&bos, 1});
    for (TokenId p : starts) {
      if (!within_caps({}, p)) continue;
      Beam b{{p}, first[static_cast<std::size_t>(p)], 0.0};
      b.score = score_of(b);
      beams.push_back(std::move(b));
    }
  }
  if (beams.empty()) {
    throw Error(ErrorCode::kEmptyPrompts, "no prompt fits the token caps");
  }
  keep_top(beams);

  for (std::size_t len = 1; len < max_length; ++len) {
    std::vector<Beam> next;
    next.reserve(beams.size() * words.size());
    for (const Beam& b : beams) {
      TokenSeq context;
      context.reserve(b.tokens.size() + 1);
      context.push_back(bos);
      context.insert(context.end(), b.tokens.begin(), b.tokens.end());
      const std::vector<double> logp = model::NextTokenLogProbs(params, context);
      for (TokenId w : words) {
        if (!within_caps(b.tokens, w)) continue;
        Beam e{b.tokens, b.log_prob + logp[static_cast<std::size_t>(w)], 0.0};
        e.tokens.push_back(w);
        e.score = score_of(e);
        next.push_back(std::move(e));
      }
    }
    if (next.empty()) break;  // caps exhausted
    keep_top(next);
    beams = std::move(next);
  }

  std::stable_sort(beams.begin(), beams.end(), [](const Beam& a, const Beam& b) {
    const double sa = a.score / static_cast<double>(a.tokens.size());
    const double sb = b.score / static_cast<double>(b.tokens.size());
    if (sa != sb) return sa > sb;
    return a.tokens < b.tokens;
  });
  return beams;
}

double PriorScore(std::span<const TokenId> tokens,
                  const model::ModelParams& params, double beta) {
  RequireTokens(tokens);
  const model::SentenceScore s = model::ScoreSentence(params, tokens);
  const double perplexity =
      std::exp(-s.log_prob / static_cast<double>(tokens.size()));
  if (!std::isfinite(perplexity) || !std::isfinite(s.grad_norm)) {
    throw Error(ErrorCode::kNumericalFailure, "prior score is not finite");
  }
  return beta == 0.0 ? perplexity : perplexity + beta * s.grad_norm;
}

TokenSeq TruncateAtPunctuation(std::span<const TokenId> tokens,
                               const model::ModelParams& params, double beta,
                               const corpus::Vocab& vocab) {
  TokenSeq whole(tokens.begin(), tokens.end());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (IsSpecial(tokens[i]) || tokens[i] == corpus::kUnkId) continue;
    const std::string& t = vocab.token(tokens[i]);
    if (t == "." || t == "?" || t == "!") {
      if (i + 1 == tokens.size()) return whole;
      TokenSeq prefix(tokens.begin(),
                      tokens.begin() + static_cast<std::ptrdiff_t>(i + 1));
      if (PriorScore(prefix, params, beta) < PriorScore(whole, params, beta)) {
        return prefix;
      }
      return whole;
    }
  }
  return whole;
}

void ReorderConfig::Validate() const {
  if (steps_per_stage < 1 || cuts < 1 || candidates_per_step < 1) {
    throw Error(ErrorCode::kInvalidInput, "reorder counts must be >= 1");
  }
  if (!(beta >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "beta must be >= 0");
  }
}

TokenSeq PhraseReorder(std::span<const TokenId> tokens,
                       const model::ModelParams& params,
                       const ReorderConfig& config, ReorderTrace* trace) {
  config.Validate();
  RequireTokens(tokens);
  if (tokens.size() < 2) {
    if (trace) trace->incumbent_scores.assign(1, PriorScore(tokens, params, config.beta));
    return TokenSeq(tokens.begin(), tokens.end());
  }
  Rng rng(config.seed);
  auto propose = [&](const TokenSeq& cur) -> std::optional<TokenSeq> {
    const std::size_t n = cur.size();
    const std::size_t n_cuts = std::min(config.cuts, n - 1);
    // Distinct cut positions in 1..n-1 via partial Fisher-Yates.
    std::vector<std::size_t> slots(n - 1);
    std::iota(slots.begin(), slots.end(), 1);
    for (std::size_t i = 0; i < n_cuts; ++i) {
      std::size_t j = i + Uniform(rng, slots.size() - i);
      std::swap(slots[i], slots[j]);
    }
    std::vector<std::size_t> cuts(slots.begin(),
                                  slots.begin() + static_cast<std::ptrdiff_t>(n_cuts));
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    std::size_t begin = 0;
    for (std::size_t c : cuts) {
      segments.emplace_back(begin, c);
      begin = c;
    }
    segments.emplace_back(begin, n);
    std::shuffle(segments.begin(), segments.end(), rng);
    TokenSeq out;
    out.reserve(n);
    for (auto [b, e] : segments) {
      out.insert(out.end(), cur.begin() + static_cast<std::ptrdiff_t>(b),
                 cur.begin() + static_cast<std::ptrdiff_t>(e));
    }
    return out;
  };
  return GreedyReorder(tokens, params, config, propose, trace);
}

TokenSeq TokenReorder(std::span<const TokenId> tokens, const BagOfWords& bag,
                      const model::ModelParams& params,
                      const ReorderConfig& config, ReorderTrace* trace) {
  config.Validate();
  RequireTokens(tokens);
  const std::vector<TokenId> words = ContentTokens(bag);
  const std::size_t max_length = params.hyper.max_positions - 1;
  Rng rng(config.seed ^ 0xA0761D6478BD642FULL);
  enum Op { kSwap, kDelete, kInsert };
  auto propose = [&](const TokenSeq& cur) -> std::optional<TokenSeq> {
    const std::size_t n = cur.size();
    std::vector<Op> ops;
    if (n >= 2) {
      ops.push_back(kSwap);
      ops.push_back(kDelete);
    }
    if (!words.empty() && n < max_length) ops.push_back(kInsert);
    if (ops.empty()) return std::nullopt;
    TokenSeq out = cur;
    switch (ops[Uniform(rng, ops.size())]) {
      case kSwap: {
        std::size_t i = Uniform(rng, n);
        std::size_t j = Uniform(rng, n - 1);
        if (j >= i) ++j;
        std::swap(out[i], out[j]);
        break;
      }
      case kDelete:
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(Uniform(rng, n)));
        break;
      case kInsert: {
        std::size_t pos = Uniform(rng, n + 1);
        TokenId w = words[Uniform(rng, words.size())];
        out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), w);
        break;
      }
    }
    return out;
  };
  return GreedyReorder(tokens, params, config, propose, trace);
}

AttackResult RecoverSingle(const fedsim::ObservedUpdate& update,
                           const corpus::Vocab& vocab,
                           const AttackOptions& options,
                           const BannedGrams& banned) {
  if (!update.params || !update.transmitted) {
    throw Error(ErrorCode::kInvalidInput, "observed update is incomplete");
  }
  const model::ModelParams& params = *update.params;
  const model::Gradients& grads = *update.transmitted;
  options.beam.Validate();
  options.reorder.Validate();

  AttackResult result;
  result.iteration = update.iteration;
  result.bag = ExtractBagOfWords(grads.word_embeddings(), options.extraction,
                                 update.iteration);
  result.recovered_max_length = ExtractMaxLength(grads.position_embeddings());
  result.beam_config = options.beam;
  result.reorder_config = options.reorder;
  if (ContentTokens(result.bag).empty()) {
    throw Error(ErrorCode::kEmptyBag,
                "update at iteration " + std::to_string(update.iteration) +
                    " reveals no tokens");
  }

  BeamSearchConfig beam_config = options.beam;
  if (result.recovered_max_length >= 2) {
    beam_config.max_length = result.recovered_max_length - 1;
  }
  beam_config.max_length =
      std::min(beam_config.max_length, params.hyper.max_positions - 1);
  result.beam_config = beam_config;

  const std::vector<TokenId> prompts =
      SelectPrompts(result.bag, vocab, beam_config.prompt_fallback);
  const std::vector<Beam> beams =
      BeamSearch(result.bag, prompts, params, beam_config, banned);

  const double beta = options.reorder.beta;
  TokenSeq best = TruncateAtPunctuation(beams.front().tokens, params, beta, vocab);
  best = PhraseReorder(best, params, options.reorder);
  best = TokenReorder(best, result.bag, params, options.reorder);

  RecoveredSentence top;
  top.rank = 0;
  top.tokens = best;
  top.prior_score = PriorScore(best, params, beta);
  top.beam_score =
      BeamScore(best, params, beam_config.penalty, beam_config.ngram, banned);
  result.recovered.push_back(std::move(top));
  for (std::size_t i = 1; i < beams.size(); ++i) {
    RecoveredSentence r;
    r.rank = i;
    r.tokens = beams[i].tokens;
    r.beam_score = beams[i].score;
    r.prior_score = options.score_runner_ups
                        ? PriorScore(r.tokens, params, beta)
                        : std::numeric_limits<double>::quiet_NaN();
    result.recovered.push_back(std::move(r));
  }
  return result;
}

std::vector<AttackResult> RecoverMultiple(const fedsim::ObservedUpdate& update,
                                          const corpus::Vocab& vocab,
                                          const AttackOptions& options,
                                          std::size_t repetitions,
                                          std::size_t ban_order) {
  if (repetitions < 1) {
    throw Error(ErrorCode::kInvalidInput, "repetitions must be >= 1");
  }
  BannedGrams banned;
  std::vector<AttackResult> results;
  results.reserve(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) {
    AttackOptions opts = options;
    opts.reorder.seed = options.reorder.seed + r;
    results.push_back(RecoverSingle(update, vocab, opts, banned));
    banned.AddAllFrom(results.back().best().tokens, ban_order);
  }
  return results;
}

}  // namespace film::attack
