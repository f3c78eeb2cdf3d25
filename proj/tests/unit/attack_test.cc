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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "film/error.h"
#include "film/metrics.h"
#include "test_util.h"

namespace film::attack {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidInput;
}

// A model trained on `lines` until it reproduces them (mean loss < 0.05).
model::ModelParams Memorize(const std::vector<std::string>& lines,
                            const corpus::Vocab& vocab) {
  model::Hyperparams h;
  h.vocab_size = vocab.size();
  h.hidden_dim = 32;
  h.n_layers = 1;
  h.n_heads = 2;
  h.max_positions = 16;
  Rng rng(7);
  model::ModelParams p = model::InitParams(h, rng);
  const corpus::Batch batch = testing::BatchOf(lines, vocab);
  model::TrainConfig cfg;
  cfg.learning_rate = 0.01;
  model::OptimizerState state;
  for (int step = 0; step < 2000; ++step) {
    const auto lg = model::ComputeLossAndGradients(p, batch);
    if (lg.loss < 0.05) break;
    p = model::ApplyUpdate(p, lg.grads, cfg, state);
  }
  return p;
}

const char kSentence[] = "the cat chases the mouse .";

class MemorizedTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    vocab_ = new corpus::Vocab(
        testing::VocabFor({kSentence, "A dog sleeps .", "Birds sing ."}));
    params_ = new model::ModelParams(Memorize({kSentence}, *vocab_));
  }
  static void TearDownTestSuite() {
    delete vocab_;
    delete params_;
  }
  static TokenSeq Ids(const std::string& text) {
    return corpus::Tokenize(text, *vocab_).token_ids;
  }

  static corpus::Vocab* vocab_;
  static model::ModelParams* params_;
};

corpus::Vocab* MemorizedTest::vocab_ = nullptr;
model::ModelParams* MemorizedTest::params_ = nullptr;

Tensor Matrix(std::size_t rows, std::size_t cols) {
  return Tensor::Zeros("m", {rows, cols});
}

TEST(ExtractionTest, ZeroMatrices) {
  EXPECT_TRUE(ExtractBagOfWords(Matrix(10, 4)).empty());
  EXPECT_EQ(ExtractMaxLength(Matrix(12, 4)), 0u);
}

TEST(ExtractionTest, ExactAndThresholdModes) {
  Tensor g = Matrix(6, 2);
  g.row(corpus::kPadId)[0] = 9.0;  // never reported
  g.row(3)[1] = 1e-30;
  g.row(4)[0] = -2.0;
  g.row(5)[1] = 0.5;
  EXPECT_EQ(ExtractBagOfWords(g).token_ids, (std::vector<TokenId>{3, 4, 5}));
  EXPECT_EQ(ExtractBagOfWords(g, ExtractionMode::Threshold(1.0)).token_ids,
            (std::vector<TokenId>{4}));
  EXPECT_EQ(ExtractBagOfWords(g, ExtractionMode::Exact(), 17).source_iteration, 17u);
}

TEST(ExtractionTest, RecoversBatchTokensAndLength) {
  const std::vector<std::string> lines = {"The cat sleeps .", "A dog runs home now ."};
  const auto vocab = testing::VocabFor(lines);
  Rng rng(1);
  const auto params = model::InitParams(testing::TinyHyper(vocab.size()), rng);
  const auto one = testing::BatchOf({lines[0]}, vocab);
  const auto g1 = model::ComputeLossAndGradients(params, one).grads;
  EXPECT_EQ(ExtractBagOfWords(g1.word_embeddings()).token_ids,
            metrics::BatchTokenSet(one));
  EXPECT_EQ(ExtractMaxLength(g1.position_embeddings()), 5u);
  const auto both = testing::BatchOf(lines, vocab);
  const auto g2 = model::ComputeLossAndGradients(params, both).grads;
  EXPECT_EQ(ExtractMaxLength(g2.position_embeddings()), 7u);
  const auto single = testing::BatchOf({"cat"}, vocab);
  EXPECT_EQ(ExtractMaxLength(model::ComputeLossAndGradients(params, single)
                                 .grads.position_embeddings()),
            2u);
}

TEST(DpsgdExtractionTest, Threshold) {
  EXPECT_NEAR(DpsgdThreshold(1.0, 768), std::sqrt(2.0 * std::log(768.0)), 1e-15);
  EXPECT_NEAR(DpsgdThreshold(1.0, 768), 3.64524, 1e-4);
  EXPECT_EQ(CodeOf([] { DpsgdThreshold(-1.0, 8); }), ErrorCode::kInvalidInput);
  Tensor g = Matrix(5, 3);
  g.row(3)[2] = 1e-12;
  EXPECT_EQ(DpsgdBowAttack(g, 0.0, 3).token_ids, ExtractBagOfWords(g).token_ids);
}

TEST(DpsgdExtractionTest, PureNoiseFlagRateMatchesGaussianTail) {
  // Each row has d independent N(0, 1) entries; a row is flagged when its
  // largest |entry| exceeds sqrt(2 ln d). The exact rate is
  // 1 - (1 - 2 Q(tau))^d with Q the standard normal upper tail.
  const std::size_t d = 64, rows = 4000;
  const double tau = DpsgdThreshold(1.0, d);
  const double q = 0.5 * std::erfc(tau / std::sqrt(2.0));
  const double expected = 1.0 - std::pow(1.0 - 2.0 * q, static_cast<double>(d));
  Rng rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor g = Matrix(rows, d);
  for (double& v : g.data) v = n(rng);
  const double rate =
      static_cast<double>(DpsgdBowAttack(g, 1.0, d).size()) / (rows - 1);
  EXPECT_NEAR(rate, expected, 4.0 * std::sqrt(expected * (1 - expected) / rows));
}

TEST(PromptTest, UppercaseRule) {
  const auto vocab = testing::VocabFor({"Let The cat dogs"});
  BagOfWords bag;
  for (const char* w : {"Let", "The", "cat", "dogs"}) bag.token_ids.push_back(vocab.id(w));
  bag.token_ids.push_back(corpus::kBosId);
  std::sort(bag.token_ids.begin(), bag.token_ids.end());
  auto prompts = SelectPrompts(bag, vocab, true);
  EXPECT_EQ(std::set<TokenId>(prompts.begin(), prompts.end()),
            (std::set<TokenId>{vocab.id("Let"), vocab.id("The")}));

  BagOfWords lower;
  lower.token_ids = {corpus::kBosId, vocab.id("cat"), vocab.id("dogs")};
  std::sort(lower.token_ids.begin(), lower.token_ids.end());
  prompts = SelectPrompts(lower, vocab, true);
  EXPECT_EQ(std::set<TokenId>(prompts.begin(), prompts.end()),
            (std::set<TokenId>{vocab.id("cat"), vocab.id("dogs")}));
  EXPECT_TRUE(SelectPrompts(lower, vocab, false).empty());
  EXPECT_EQ(CodeOf([&] { SelectPrompts(BagOfWords{}, vocab, true); }),
            ErrorCode::kEmptyBag);
}

TEST(PenaltyTest, NgramRepeats) {
  const std::vector<TokenId> the_cat = {5, 6, 5, 6};
  EXPECT_EQ(NgramRepeatCount(the_cat, 2), 1u);
  EXPECT_EQ(NgramRepeatCount(std::vector<TokenId>{3, 4, 5, 6}, 1), 0u);
  EXPECT_EQ(NgramRepeatCount(std::vector<TokenId>{7, 7, 7}, 1), 2u);
  EXPECT_EQ(NgramRepeatCount(std::vector<TokenId>{7}, 2), 0u);
}

TEST(PenaltyTest, BannedGramCounting) {
  BannedGrams banned;
  banned.AddAllFrom(std::vector<TokenId>{3, 4, 5}, 2);
  EXPECT_EQ(banned.CountIn(std::vector<TokenId>{3, 4, 5}), 2u);
  EXPECT_EQ(banned.CountIn(std::vector<TokenId>{5, 4, 3}), 0u);
  banned.Add(std::vector<TokenId>{3, 4});
  EXPECT_EQ(banned.CountIn(std::vector<TokenId>{3, 4, 9}), 2u);
  BannedGrams whole;
  whole.AddAllFrom(std::vector<TokenId>{8, 9}, 4);
  EXPECT_EQ(whole.CountIn(std::vector<TokenId>{1, 8, 9}), 1u);
}

TEST_F(MemorizedTest, BeamScoreArithmetic) {
  const TokenSeq s = Ids("cat the cat the");
  const double lp = model::SentenceLogProb(*params_, s);
  EXPECT_EQ(BeamScore(s, *params_, 0.0, 2), lp);
  EXPECT_NEAR(BeamScore(s, *params_, 1.5, 2), lp - 1.5 * 1, 1e-12);
  BannedGrams banned;
  banned.Add(Ids("cat the"));
  const TokenSeq t = Ids("The cat the mouse");
  EXPECT_NEAR(BeamScore(t, *params_, 2.0, 2, banned),
              model::SentenceLogProb(*params_, t) - 2.0, 1e-12);
  EXPECT_EQ(CodeOf([&] { BeamScore({}, *params_, 1.0, 2); }),
            ErrorCode::kInvalidInput);
}

TEST_F(MemorizedTest, PriorScoreDefinition) {
  const TokenSeq s = Ids(kSentence);
  EXPECT_EQ(PriorScore(s, *params_, 0.0), model::Perplexity(*params_, s));
  const auto score = model::ScoreSentence(*params_, s);
  EXPECT_NEAR(PriorScore(s, *params_, 1.0),
              std::exp(-score.log_prob / s.size()) + score.grad_norm, 1e-12);
  EXPECT_EQ(CodeOf([&] { PriorScore({}, *params_, 1.0); }),
            ErrorCode::kInvalidInput);
}

TEST_F(MemorizedTest, OriginalBeatsSwappedVariants) {
  const TokenSeq s = Ids(kSentence);
  const double original = PriorScore(s, *params_, 1.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[i] == s[j]) continue;
      TokenSeq t = s;
      std::swap(t[i], t[j]);
      EXPECT_LT(original, PriorScore(t, *params_, 1.0)) << i << "," << j;
    }
  }
}

TEST_F(MemorizedTest, TruncationKeepsTheBetterPrefix) {
  const TokenSeq s = Ids(kSentence);
  EXPECT_EQ(TruncateAtPunctuation(Ids("The cat chases"), *params_, 1.0, *vocab_),
            Ids("The cat chases"));
  TokenSeq garbage = s;
  for (const char* w : {"mouse", "cat", "mouse"}) garbage.push_back(vocab_->id(w));
  const bool prefix_wins =
      PriorScore(s, *params_, 1.0) < PriorScore(garbage, *params_, 1.0);
  ASSERT_TRUE(prefix_wins);
  EXPECT_EQ(TruncateAtPunctuation(garbage, *params_, 1.0, *vocab_), s);
  // "A ." scores worse than "A . <memorised sentence>" on this model only if
  // the guard is respected; compare against the scores directly.
  TokenSeq tail = Ids("mouse .");
  tail.insert(tail.end(), s.begin(), s.end());
  const TokenSeq head = Ids("mouse .");
  const TokenSeq want =
      PriorScore(head, *params_, 1.0) < PriorScore(tail, *params_, 1.0) ? head
                                                                       : tail;
  EXPECT_EQ(TruncateAtPunctuation(tail, *params_, 1.0, *vocab_), want);
}

TEST_F(MemorizedTest, BeamSearchRecoversMemorizedSentence) {
  const TokenSeq s = Ids(kSentence);
  BagOfWords bag;
  bag.token_ids = s;
  bag.token_ids.push_back(corpus::kBosId);
  std::sort(bag.token_ids.begin(), bag.token_ids.end());
  bag.token_ids.erase(std::unique(bag.token_ids.begin(), bag.token_ids.end()),
                      bag.token_ids.end());
  BeamSearchConfig cfg;
  cfg.beam_size = 8;
  cfg.max_length = s.size() + 1;
  const auto prompts = SelectPrompts(bag, *vocab_, true);
  const auto beams = BeamSearch(bag, prompts, *params_, cfg);
  ASSERT_FALSE(beams.empty());
  EXPECT_LE(beams.size(), 8u);
  const TokenSeq top =
      TruncateAtPunctuation(beams.front().tokens, *params_, 1.0, *vocab_);
  EXPECT_EQ(top, s);
  EXPECT_DOUBLE_EQ(metrics::RougeL(top, s), 1.0);
  for (const auto& b : beams) {
    for (TokenId t : b.tokens) EXPECT_TRUE(bag.contains(t));
    EXPECT_NEAR(b.score, BeamScore(b.tokens, *params_, cfg.penalty, cfg.ngram),
                1e-9);
  }
  const auto again = BeamSearch(bag, prompts, *params_, cfg);
  ASSERT_EQ(again.size(), beams.size());
  for (std::size_t i = 0; i < beams.size(); ++i) {
    EXPECT_EQ(again[i].tokens, beams[i].tokens);
    EXPECT_EQ(again[i].score, beams[i].score);
  }
}

TEST_F(MemorizedTest, SingleTokenBeam) {
  BagOfWords bag;
  const TokenId x = vocab_->id("cat");
  bag.token_ids = {x};
  BeamSearchConfig cfg;
  cfg.beam_size = 1;
  cfg.max_length = 4;
  const auto beams = BeamSearch(bag, std::vector<TokenId>{x}, *params_, cfg);
  ASSERT_EQ(beams.size(), 1u);
  EXPECT_EQ(beams[0].tokens, TokenSeq(4, x));
  EXPECT_NEAR(beams[0].score,
              model::SentenceLogProb(*params_, beams[0].tokens) - 2.0, 1e-9);
  EXPECT_EQ(CodeOf([&] { BeamSearch(BagOfWords{}, {}, *params_, cfg); }),
            ErrorCode::kEmptyBag);
  EXPECT_EQ(CodeOf([&] { BeamSearch(bag, {}, *params_, cfg); }),
            ErrorCode::kEmptyPrompts);
}

TEST_F(MemorizedTest, ReorderingIsMonotoneAndRestoresOrder) {
  const TokenSeq s = Ids(kSentence);
  const TokenSeq scrambled = Ids("the mouse chases the cat .");
  ReorderConfig cfg;
  cfg.steps_per_stage = 60;
  cfg.candidates_per_step = 16;
  std::size_t restored = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    ReorderTrace trace;
    TokenSeq out = PhraseReorder(scrambled, *params_, cfg, &trace);
    ASSERT_FALSE(trace.incumbent_scores.empty());
    for (std::size_t i = 1; i < trace.incumbent_scores.size(); ++i) {
      EXPECT_LE(trace.incumbent_scores[i], trace.incumbent_scores[i - 1]);
    }
    EXPECT_NEAR(trace.incumbent_scores.back(), PriorScore(out, *params_, cfg.beta),
                1e-9);
    auto a = out, b = scrambled;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);  // a permutation
    restored += out == s;
  }
  EXPECT_GE(restored, 3u);
  cfg.seed = 0;
  const TokenSeq one = {vocab_->id("cat")};
  EXPECT_EQ(PhraseReorder(one, *params_, cfg), one);
}

TEST_F(MemorizedTest, TokenReorderFixesCorruptionAndRespectsBag) {
  const TokenSeq s = Ids(kSentence);
  BagOfWords bag;
  bag.token_ids = s;
  std::sort(bag.token_ids.begin(), bag.token_ids.end());
  bag.token_ids.erase(std::unique(bag.token_ids.begin(), bag.token_ids.end()),
                      bag.token_ids.end());
  ReorderConfig cfg;  // defaults: 200 steps, 32 candidates per step
  // Single-edit corruptions: transpositions, one extra and one missing word.
  // Greedy search can stall in a local minimum on a given seed, so the check
  // is a majority over seeds and corruptions.
  std::size_t fixed = 0, runs = 0;
  for (const char* text :
       {"the chases cat the mouse .", "the cat chases mouse the .",
        "cat the chases the mouse .", "the cat the chases mouse .",
        "the cat chases cat the mouse .", "the cat chases mouse ."}) {
    const TokenSeq corrupted = Ids(text);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      cfg.seed = seed;
      ReorderTrace trace;
      const TokenSeq out = TokenReorder(corrupted, bag, *params_, cfg, &trace);
      for (std::size_t i = 1; i < trace.incumbent_scores.size(); ++i) {
        ASSERT_LE(trace.incumbent_scores[i], trace.incumbent_scores[i - 1]);
      }
      EXPECT_LT(trace.incumbent_scores.back(), trace.incumbent_scores.front());
      fixed += out == s;
      ++runs;
    }
  }
  EXPECT_GT(2 * fixed, runs) << fixed << "/" << runs;
  const TokenSeq extra = Ids("the cat chases cat the mouse .");
  cfg.seed = 0;
  cfg.steps_per_stage = 50;

  // Without a bag only swaps and deletions are possible.
  const TokenSeq out = TokenReorder(extra, BagOfWords{}, *params_, cfg);
  std::multiset<TokenId> before(extra.begin(), extra.end());
  for (TokenId t : out) {
    auto it = before.find(t);
    ASSERT_NE(it, before.end());
    before.erase(it);
  }
  EXPECT_EQ(CodeOf([&] { TokenReorder({}, bag, *params_, cfg); }),
            ErrorCode::kInvalidInput);
}

class RecoveryTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    lines_ = {"The cat chases the mouse .", "A dog sleeps ."};
    vocab_ = new corpus::Vocab(testing::VocabFor(lines_));
    params_ = new model::ModelParams(Memorize(lines_, *vocab_));
  }
  static void TearDownTestSuite() {
    delete vocab_;
    delete params_;
  }

  static AttackOptions Options() {
    AttackOptions o;
    o.beam.beam_size = 8;
    o.reorder.steps_per_stage = 20;
    o.reorder.candidates_per_step = 8;
    return o;
  }

  static std::vector<std::string> lines_;
  static corpus::Vocab* vocab_;
  static model::ModelParams* params_;
};

std::vector<std::string> RecoveryTest::lines_;
corpus::Vocab* RecoveryTest::vocab_ = nullptr;
model::ModelParams* RecoveryTest::params_ = nullptr;

TEST_F(RecoveryTest, SingleSentenceBatchIsRecoveredExactly) {
  const auto batch = testing::BatchOf({lines_[0]}, *vocab_);
  const auto grads = model::ComputeLossAndGradients(*params_, batch).grads;
  const fedsim::ObservedUpdate update{3, params_, &grads};
  const AttackResult r = RecoverSingle(update, *vocab_, Options());
  EXPECT_EQ(r.iteration, 3u);
  EXPECT_EQ(r.recovered_max_length, batch.length(0) + 1);
  EXPECT_EQ(r.bag.token_ids, metrics::BatchTokenSet(batch));
  EXPECT_EQ(r.best().tokens, batch.members()[0].token_ids);
  EXPECT_EQ(r.best().rank, 0u);
  for (std::size_t i = 1; i < r.recovered.size(); ++i) {
    EXPECT_EQ(r.recovered[i].rank, i);
  }
}

TEST_F(RecoveryTest, MultipleRecoveryBaseCaseAndBans) {
  const auto batch = testing::BatchOf(lines_, *vocab_);
  const auto grads = model::ComputeLossAndGradients(*params_, batch).grads;
  const fedsim::ObservedUpdate update{0, params_, &grads};
  const auto single = RecoverSingle(update, *vocab_, Options());
  const auto one = RecoverMultiple(update, *vocab_, Options(), 1);
  ASSERT_EQ(one.size(), 1u);
  ASSERT_EQ(one[0].recovered.size(), single.recovered.size());
  for (std::size_t i = 0; i < single.recovered.size(); ++i) {
    EXPECT_EQ(one[0].recovered[i].tokens, single.recovered[i].tokens);
  }
  const auto three = RecoverMultiple(update, *vocab_, Options(), 3);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(three[0].best().tokens, single.best().tokens);
  EXPECT_EQ(three[1].reorder_config.seed, Options().reorder.seed + 1);

  std::vector<TokenSeq> truth;
  for (const auto& m : batch.members()) truth.push_back(m.token_ids);
  double prev_recall = 0.0, prev_precision = 1.0;
  for (std::size_t r = 1; r <= three.size(); ++r) {
    std::vector<TokenSeq> rec;
    for (std::size_t i = 0; i < r; ++i) rec.push_back(three[i].best().tokens);
    const auto m = metrics::ComputeMultiSentenceScores(rec, truth);
    EXPECT_GE(m.recall, prev_recall);
    prev_recall = m.recall;
    prev_precision = m.precision;
  }
  EXPECT_LE(prev_precision, 1.0);
}

TEST_F(RecoveryTest, FrozenEmbeddingsRevealNothing) {
  const auto batch = testing::BatchOf(lines_, *vocab_);
  const auto grads = fedsim::ApplyFreeze(
      model::ComputeLossAndGradients(*params_, batch).grads);
  const fedsim::ObservedUpdate update{0, params_, &grads};
  EXPECT_EQ(CodeOf([&] { RecoverSingle(update, *vocab_, Options()); }),
            ErrorCode::kEmptyBag);
}

TEST_F(RecoveryTest, RecoveryIsDeterministic) {
  const auto batch = testing::BatchOf(lines_, *vocab_);
  const auto grads = model::ComputeLossAndGradients(*params_, batch).grads;
  const fedsim::ObservedUpdate update{0, params_, &grads};
  const auto a = RecoverMultiple(update, *vocab_, Options(), 2);
  const auto b = RecoverMultiple(update, *vocab_, Options(), 2);
  for (std::size_t r = 0; r < 2; ++r) {
    ASSERT_EQ(a[r].recovered.size(), b[r].recovered.size());
    for (std::size_t i = 0; i < a[r].recovered.size(); ++i) {
      EXPECT_EQ(a[r].recovered[i].tokens, b[r].recovered[i].tokens);
      EXPECT_EQ(a[r].recovered[i].prior_score, b[r].recovered[i].prior_score);
    }
  }
}

}  // namespace
}  // namespace film::attack
