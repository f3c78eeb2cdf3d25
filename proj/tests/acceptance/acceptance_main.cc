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

// End-to-end acceptance checks on the bundled toy corpora. Prints one
// PASS/FAIL line per criterion and exits non-zero if any fails.
//
//   film_acceptance [criterion numbers...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "film/attack.h"
#include "film/cli.h"
#include "film/corpus.h"
#include "film/error.h"
#include "film/fedsim.h"
#include "film/io.h"
#include "film/metrics.h"
#include "film/model.h"
#include "test_util.h"

namespace film::acceptance {
namespace {

namespace fs = std::filesystem;
using attack::TokenSeq;
using corpus::TokenId;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

double Mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

// Corpus plus vocabulary built from it.
struct Data {
  corpus::Vocab vocab;
  corpus::Corpus corpus;
};

Data LoadData(const std::string& name) {
  const fs::path path = testing::DataDir() / name;
  Data d;
  d.vocab = corpus::BuildVocab(corpus::ReadLines(path));
  d.corpus = corpus::LoadCorpus(path, d.vocab);
  return d;
}

model::Hyperparams ToyHyper(std::size_t vocab_size) {
  model::Hyperparams h;  // d=64, 2 layers, 4 heads
  h.vocab_size = vocab_size;
  return h;
}

// Attack settings used throughout: a smaller beam and reorder budget than the
// library defaults keep the whole suite within a desk-scale time budget.
attack::AttackOptions ToyAttack() {
  attack::AttackOptions o;
  o.beam.beam_size = 16;
  o.reorder.steps_per_stage = 50;
  o.reorder.candidates_per_step = 16;
  o.score_runner_ups = false;
  return o;
}

// Federated training with Adam on batches of 16.
fedsim::TrainingRun Train(const Data& data, std::size_t iterations,
                          std::size_t capture_every, std::uint64_t seed) {
  model::TrainConfig cfg;
  cfg.iterations = iterations;
  cfg.batch_size = 16;
  cfg.learning_rate = 3e-3;
  cfg.seed = seed;
  return fedsim::RunTraining(data.corpus, ToyHyper(data.vocab.size()), cfg,
                             fedsim::DefenseConfig::None(), capture_every);
}

corpus::Batch WholeCorpus(const Data& data) {
  return corpus::Batch(data.corpus.sentences);
}

// Smallest mean next-token loss any model can reach on `data`: the empirical
// conditional entropy of each target given its prefix. Every sentence is a
// distinct continuation of <bos>, so this is well above zero for small
// corpora of short sentences.
double EntropyFloor(const Data& data) {
  std::map<TokenSeq, std::size_t> prefixes, extended;
  std::size_t positions = 0;
  for (const auto& s : data.corpus.sentences) {
    TokenSeq seq = s.token_ids;
    seq.push_back(corpus::kBosId);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      ++prefixes[TokenSeq(seq.begin(), seq.begin() + i)];
      ++extended[TokenSeq(seq.begin(), seq.begin() + i + 1)];
    }
  }
  double total = 0.0;
  for (const auto& s : data.corpus.sentences) {
    TokenSeq seq = s.token_ids;
    seq.push_back(corpus::kBosId);
    for (std::size_t i = 0; i < seq.size(); ++i, ++positions) {
      total -= std::log(
          static_cast<double>(extended[TokenSeq(seq.begin(), seq.begin() + i + 1)]) /
          prefixes[TokenSeq(seq.begin(), seq.begin() + i)]);
    }
  }
  return total / positions;
}

struct Memorized {
  model::ModelParams params;
  double loss = 0.0;
  double floor = 0.0;
};

// Overfits the toy model on every sentence of `data` until the corpus loss
// drops below `target` or comes within 0.01 of the entropy floor.
Memorized Memorize(const Data& data, double target) {
  model::TrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 16;
  Rng rng(2024);
  Memorized m;
  m.floor = EntropyFloor(data);
  m.params = model::InitParams(ToyHyper(data.vocab.size()), rng);
  model::OptimizerState state;
  const corpus::Batch all = WholeCorpus(data);
  const double stop = std::max(target, m.floor + 0.01);
  m.loss = model::ComputeLoss(m.params, all);
  for (std::size_t step = 1; step <= 6000 && m.loss >= stop; ++step) {
    const corpus::Batch batch = corpus::SampleBatch(data.corpus, 16, rng);
    m.params = model::ApplyUpdate(
        m.params, model::ComputeLossAndGradients(m.params, batch).grads, cfg, state);
    if (step % 50 == 0) m.loss = model::ComputeLoss(m.params, all);
  }
  return m;
}

// Bag of a batch observed without any defense.
attack::BagOfWords ObservedBag(const model::ModelParams& p,
                               const corpus::Batch& batch) {
  const auto g = model::ComputeLossAndGradients(p, batch).grads;
  return attack::ExtractBagOfWords(g.word_embeddings());
}

// Mean ROUGE-L of single recoveries over `batches` at `params`.
double MeanRougeL(const model::ModelParams& params,
                  const std::vector<corpus::Batch>& batches,
                  const corpus::Vocab& vocab,
                  const attack::AttackOptions& options,
                  std::vector<double>* per_batch = nullptr) {
  std::vector<double> scores;
  for (const auto& batch : batches) {
    const auto g = model::ComputeLossAndGradients(params, batch).grads;
    const fedsim::ObservedUpdate update{0, &params, &g};
    const auto result = attack::RecoverSingle(update, vocab, options);
    const auto report = metrics::ScoreEntry(std::vector{result}, batch, 0);
    scores.push_back(report.rouge.rougeL);
  }
  if (per_batch) *per_batch = scores;
  return Mean(scores);
}

std::vector<corpus::Batch> SampleBatches(const Data& data, std::size_t b,
                                         std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<corpus::Batch> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(corpus::SampleBatch(data.corpus, b, rng));
  }
  return out;
}

// Shared trained model on the 256-sentence corpus (criteria 7, 8 and 12).
struct TrainedToy {
  Data data;
  fedsim::TrainingRun run;
};

const TrainedToy& Trained() {
  static const std::unique_ptr<TrainedToy> toy = [] {
    auto t = std::make_unique<TrainedToy>();
    t->data = LoadData("toy_256.txt");
    t->run = Train(t->data, 600, 1000, 11);
    return t;
  }();
  return *toy;
}

// 1. Analytic vs central-difference gradients.
Outcome GradientCorrectness() {
  const Data data = LoadData("toy_32.txt");
  model::Hyperparams h;
  h.vocab_size = data.vocab.size();
  h.hidden_dim = 8;
  h.n_layers = 2;
  h.n_heads = 2;
  h.max_positions = 16;
  double worst = 0.0;
  std::size_t params = 0;
  for (bool tied : {false, true}) {
    h.tie_embeddings = tied;
    params = std::max(params, model::ParameterCount(h));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(100 + seed);
      const model::ModelParams p = model::InitParams(h, rng);
      const corpus::Batch batch = corpus::SampleBatch(data.corpus, 3, rng);
      const auto lg = model::ComputeLossAndGradients(p, batch);
      worst = std::max(worst, testing::MaxFiniteDifferenceError(p, batch, lg.grads));
    }
  }
  return {worst <= 1e-4 && params <= 10000,
          Format("%zu params, max relative error %.2e over 5 batches (untied and "
                 "tied)",
                 params, worst)};
}

// 2. Undefended extraction is exact.
Outcome ExtractionExactness() {
  const Data data = LoadData("toy_512.txt");
  bool ok = true;
  std::size_t checks = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(200 + seed);
    const auto p = model::InitParams(ToyHyper(data.vocab.size()), rng);
    for (std::size_t b : {1, 16, 64, 128}) {
      const corpus::Batch batch = corpus::SampleBatch(data.corpus, b, rng);
      const auto bag = ObservedBag(p, batch);
      const auto s =
          metrics::ComputeTokenSetScores(bag.token_ids, metrics::BatchTokenSet(batch));
      ok = ok && s.precision == 1.0 && s.recall == 1.0;
      ++checks;
    }
  }
  return {ok, Format("%zu (seed, batch size) pairs, precision = recall = 1.0: %s",
                     checks, ok ? "all" : "not all")};
}

// 3. Pruning keeps precision at 1 and recall falls with the ratio.
Outcome PruningDefense() {
  const Data data = LoadData("toy_512.txt");
  const std::vector<double> ratios = {0.0, 0.9, 0.99, 0.999};
  std::vector<double> recall_sum(ratios.size(), 0.0);
  bool precision_ok = true, monotone = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(300 + seed);
    const auto p = model::InitParams(ToyHyper(data.vocab.size()), rng);
    const corpus::Batch batch = corpus::SampleBatch(data.corpus, 16, rng);
    const auto g = model::ComputeLossAndGradients(p, batch).grads;
    const auto truth = metrics::BatchTokenSet(batch);
    double prev = 2.0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      const auto pruned = fedsim::ApplyGradientPruning(g, ratios[i]);
      const auto bag = attack::ExtractBagOfWords(pruned.word_embeddings());
      const auto s = metrics::ComputeTokenSetScores(bag.token_ids, truth);
      precision_ok = precision_ok && (bag.empty() || s.precision == 1.0);
      monotone = monotone && s.recall <= prev;
      prev = s.recall;
      recall_sum[i] += s.recall;
    }
  }
  return {precision_ok && monotone,
          Format("mean recall at p=0/0.9/0.99/0.999: %.3f %.3f %.3f %.3f; "
                 "precision 1.0 %s; per-seed recall non-increasing %s",
                 recall_sum[0] / 10, recall_sum[1] / 10, recall_sum[2] / 10,
                 recall_sum[3] / 10, precision_ok ? "yes" : "no",
                 monotone ? "yes" : "no")};
}

// 4. DPSGD with the noise-threshold attack.
Outcome DpsgdDefense() {
  const Data data = LoadData("toy_512.txt");
  const std::size_t b = 16, d = 64;
  const double clip = 1.0;
  const std::vector<double> sigmas = {0.0, 0.02, 0.1, 0.5};
  std::vector<double> recall(sigmas.size(), 0.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(400 + seed);
    const auto p = model::InitParams(ToyHyper(data.vocab.size()), rng);
    const corpus::Batch batch = corpus::SampleBatch(data.corpus, b, rng);
    const auto truth = metrics::BatchTokenSet(batch);
    std::vector<model::Gradients> per;
    for (auto& e : model::PerExampleGradients(p, batch)) per.push_back(std::move(e.grads));
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      Rng noise(4000 + seed);
      const auto g = fedsim::ApplyDpsgd(per, clip, sigmas[i], noise);
      // Per-entry noise on the transmitted update has std sigma * C / b.
      const auto bag = attack::DpsgdBowAttack(g.word_embeddings(),
                                              sigmas[i] * clip / b, d);
      recall[i] += metrics::ComputeTokenSetScores(bag.token_ids, truth).recall / 10;
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < recall.size(); ++i) monotone &= recall[i] <= recall[i - 1];

  // Pure noise: rows of N(0, sigma^2), flagged when max |entry| > tau.
  const std::size_t vocab = data.vocab.size();
  std::size_t flagged = 0, trials = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(40000 + seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Tensor noise = Tensor::Zeros("noise", {vocab, d});
    for (double& v : noise.data) v = n(rng);
    flagged += attack::DpsgdBowAttack(noise, 1.0, d).size();
    trials += vocab - 1;  // the pad row is never reported
  }
  const double rate = static_cast<double>(flagged) / trials;
  const double tol = 3.0 * std::sqrt(0.05 * 0.95 / trials);
  const bool noise_ok = rate <= 0.05 + tol;
  const double tau = attack::DpsgdThreshold(1.0, d);
  // P(max of d |N(0,1)| > tau) = 1 - (1 - erfc(tau / sqrt 2))^d.
  const double analytic =
      1.0 - std::pow(1.0 - std::erfc(tau / std::sqrt(2.0)), static_cast<double>(d));
  return {recall[0] == 1.0 && monotone && noise_ok,
          Format("recall at sigma 0/0.02/0.1/0.5: %.3f %.3f %.3f %.3f "
                 "(non-increasing %s); pure-noise flagged fraction %.4f "
                 "(bound 0.05, analytic row rate %.4f)",
                 recall[0], recall[1], recall[2], recall[3],
                 monotone ? "yes" : "no", rate, analytic)};
}

// 5. Frozen embeddings reveal nothing.
Outcome FreezingDefense() {
  const Data data = LoadData("toy_32.txt");
  model::TrainConfig cfg;
  cfg.iterations = 20;
  cfg.batch_size = 16;
  cfg.freeze_embeddings = true;
  cfg.seed = 5;
  const auto run =
      fedsim::RunTraining(data.corpus, ToyHyper(data.vocab.size()), cfg,
                          fedsim::DefenseConfig::FreezeEmbeddings(), 5);
  bool ok = !run.transcript.entries.empty();
  for (const auto& e : run.transcript.entries) {
    bool empty_bag = false;
    try {
      attack::RecoverSingle(e.observed(), data.vocab, ToyAttack());
    } catch (const Error& err) {
      empty_bag = err.code() == ErrorCode::kEmptyBag;
    }
    const auto report = metrics::ScoreEntry({}, *e.eval_only_batch, e.iteration);
    ok = ok && empty_bag &&
         attack::ExtractBagOfWords(e.transmitted.word_embeddings()).empty() &&
         report.bag.precision == 0.0 && report.bag.recall == 0.0;
  }
  return {ok, Format("%zu frozen entries: empty bag and precision = recall = 0 %s",
                     run.transcript.entries.size(), ok ? "on all" : "not on all")};
}

// 6. Memorized sentences are recovered at b=1.
Outcome MemorizationRecovery() {
  const Data data = LoadData("toy_32.txt");
  const Memorized m = Memorize(data, 0.1);
  std::vector<double> scores;
  MeanRougeL(m.params, SampleBatches(data, 1, 20, 600), data.vocab, ToyAttack(),
             &scores);
  const auto good = std::count_if(scores.begin(), scores.end(),
                                  [](double s) { return s >= 0.9; });
  return {m.loss < 0.1 && good >= 16,
          Format("corpus loss %.4f (target 0.1, entropy floor of this corpus "
                 "%.4f); ROUGE-L >= 0.9 on %ld/20 batches (mean %.3f)",
                 m.loss, m.floor, static_cast<long>(good), Mean(scores))};
}

// 7. Larger batches are harder.
Outcome BatchSizeTrend() {
  const TrainedToy& t = Trained();
  const auto& p = t.run.final_params;
  const double r1 = MeanRougeL(p, SampleBatches(t.data, 1, 20, 700), t.data.vocab,
                               ToyAttack());
  const double r16 = MeanRougeL(p, SampleBatches(t.data, 16, 20, 716),
                                t.data.vocab, ToyAttack());
  return {r1 > r16, Format("mean ROUGE-L b=1 %.3f, b=16 %.3f", r1, r16)};
}

// 8. A trained model leaks more than the initial one.
Outcome IterationTrend() {
  const TrainedToy& t = Trained();
  const auto& entries = t.run.transcript.entries;
  const auto batches = SampleBatches(t.data, 16, 20, 800);
  const double first = MeanRougeL(entries.front().params, batches, t.data.vocab,
                                  ToyAttack());
  const double last = MeanRougeL(entries.back().params, batches, t.data.vocab,
                                 ToyAttack());
  return {last - first >= 0.05,
          Format("mean ROUGE-L at t=%zu %.3f, at t=%zu %.3f (gain %.3f)",
                 entries.front().iteration, first, entries.back().iteration, last,
                 last - first)};
}

// 9. Reordering never worsens the prior and repairs swapped tokens.
Outcome ReorderingSoundness() {
  // 50 memorized sentences.
  Data data = LoadData("toy_256.txt");
  data.corpus.sentences.resize(50);
  const Memorized m = Memorize(data, 0.1);
  const model::ModelParams& p = m.params;
  const bool memorized = m.loss < m.floor + 0.02;
  attack::ReorderConfig cfg;
  cfg.steps_per_stage = 100;
  cfg.candidates_per_step = 16;
  Rng rng(900);
  std::size_t improved = 0, steps = 0;
  bool monotone = true;
  auto check = [&](const attack::ReorderTrace& trace) {
    for (std::size_t i = 1; i < trace.incumbent_scores.size(); ++i, ++steps) {
      monotone &= trace.incumbent_scores[i] <= trace.incumbent_scores[i - 1];
    }
  };
  for (std::size_t i = 0; i < 50; ++i) {
    const TokenSeq& original = data.corpus.sentences[i].token_ids;
    TokenSeq swapped = original;
    std::size_t a = 0, b = 0;
    while (swapped[a] == swapped[b]) {
      a = std::uniform_int_distribution<std::size_t>(0, swapped.size() - 1)(rng);
      b = std::uniform_int_distribution<std::size_t>(0, swapped.size() - 1)(rng);
    }
    std::swap(swapped[a], swapped[b]);
    attack::BagOfWords bag;
    bag.token_ids = original;
    std::sort(bag.token_ids.begin(), bag.token_ids.end());
    bag.token_ids.erase(std::unique(bag.token_ids.begin(), bag.token_ids.end()),
                        bag.token_ids.end());
    cfg.seed = i;
    attack::ReorderTrace phrase_trace, token_trace;
    attack::PhraseReorder(swapped, p, cfg, &phrase_trace);
    check(phrase_trace);
    const TokenSeq out = attack::TokenReorder(swapped, bag, p, cfg, &token_trace);
    check(token_trace);
    improved += metrics::RougeL(out, original) > metrics::RougeL(swapped, original);
  }
  return {monotone && memorized && improved >= 30,
          Format("corpus loss %.4f (entropy floor %.4f); %zu reorder steps, prior "
                 "never increased: %s; token reorder improved ROUGE-L on %zu/50",
                 m.loss, m.floor, steps, monotone ? "yes" : "no", improved)};
}

// 10. Metric oracles.
Outcome MetricOracles() {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> len(1, 10), tok(3, 8);
  std::size_t exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    TokenSeq a(len(rng)), b(len(rng));
    for (auto& t : a) t = tok(rng);
    for (auto& t : b) t = tok(rng);
    // Brute force: longest subsequence of `a` that is also one of `b`.
    std::size_t lcs = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << a.size()); ++mask) {
      TokenSeq sub;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask >> i & 1) sub.push_back(a[i]);
      }
      std::size_t j = 0;
      for (TokenId t : b) j += j < sub.size() && sub[j] == t;
      if (j == sub.size()) lcs = std::max(lcs, sub.size());
    }
    double f = 0.0;
    if (lcs > 0) {
      const double pr = double(lcs) / a.size(), rc = double(lcs) / b.size();
      f = 2 * pr * rc / (pr + rc);
    }
    exact += metrics::RougeL(a, b) == f;
  }
  const TokenSeq abc = {1, 2, 3}, abd = {1, 2, 4};
  const bool worked = metrics::RougeN(abc, abd, 1) == 2.0 / 3.0 &&
                      metrics::RougeN(abc, abc, 1) == 1.0 &&
                      metrics::RougeN(abc, TokenSeq{4, 5, 6}, 1) == 0.0 &&
                      metrics::RougeL(TokenSeq{1, 3, 2, 4}, TokenSeq{1, 2, 3, 4}) ==
                          0.75 &&
                      metrics::RougeL(TokenSeq{}, abc) == 0.0;
  return {exact == 100 && worked,
          Format("ROUGE-L equals brute force on %zu/100 pairs; worked examples %s",
                 exact, worked ? "match" : "differ")};
}

// 11. Repeated recovery: recall rises, precision falls.
Outcome MultiSentenceTrend() {
  const TrainedToy& t = Trained();
  const auto& p = t.run.final_params;
  const std::vector<std::size_t> reps = {1, 5, 10};
  std::vector<double> recall(reps.size(), 0.0), precision(reps.size(), 0.0);
  const auto batches = SampleBatches(t.data, 16, 10, 1100);
  for (std::size_t s = 0; s < batches.size(); ++s) {
    const auto& batch = batches[s];
    const auto g = model::ComputeLossAndGradients(p, batch).grads;
    attack::AttackOptions o = ToyAttack();
    o.reorder.seed = s;
    const auto results = attack::RecoverMultiple({0, &p, &g}, t.data.vocab, o, 10);
    std::vector<TokenSeq> truth;
    for (const auto& m : batch.members()) truth.push_back(m.token_ids);
    for (std::size_t i = 0; i < reps.size(); ++i) {
      std::vector<TokenSeq> rec;
      for (std::size_t r = 0; r < reps[i]; ++r) rec.push_back(results[r].best().tokens);
      const auto m = metrics::ComputeMultiSentenceScores(rec, truth);
      recall[i] += m.recall / batches.size();
      precision[i] += m.precision / batches.size();
    }
  }
  const bool ok = recall[0] <= recall[1] && recall[1] <= recall[2] &&
                  precision[0] >= precision[1] && precision[1] >= precision[2];
  return {ok, Format("R=1/5/10 recall %.3f %.3f %.3f, precision %.3f %.3f %.3f",
                     recall[0], recall[1], recall[2], precision[0], precision[1],
                     precision[2])};
}

// 12. The bigram repetition penalty does not hurt on repeated-word sentences.
Outcome NgramAblation() {
  const TrainedToy& t = Trained();
  std::vector<corpus::Batch> cases;
  for (const auto& s : t.data.corpus.sentences) {
    const std::set<TokenId> unique(s.token_ids.begin(), s.token_ids.end());
    if (unique.size() < s.token_ids.size()) cases.push_back(corpus::Batch({s}));
    if (cases.size() == 20) break;
  }
  attack::AttackOptions with = ToyAttack();
  with.beam.penalty = 1.0;
  with.beam.ngram = 2;
  attack::AttackOptions without = with;
  without.beam.penalty = 0.0;
  const auto& p = t.run.final_params;
  const double on = MeanRougeL(p, cases, t.data.vocab, with);
  const double off = MeanRougeL(p, cases, t.data.vocab, without);
  return {cases.size() == 20 && on >= off,
          Format("%zu cases; mean ROUGE-L rho=1,n=2 %.3f vs rho=0 %.3f",
                 cases.size(), on, off)};
}

// 13. The CLI pipeline is byte-reproducible.
Outcome Determinism() {
  const fs::path dir = testing::ScratchDir("acceptance_determinism");
  const fs::path conf = dir / "run.conf";
  std::ostringstream c;
  c << "seed = 13\nout = " << (dir / "train").string() << "\n"
    << "corpus.train = " << (testing::DataDir() / "toy_32.txt").string() << "\n"
    << "train.iterations = 30\ntrain.capture_every = 10\n"
    << "beam.k = 8\nreorder.steps = 10\nreorder.candidates = 8\n"
    << "attack.transcript = " << (dir / "train").string() << "\n"
    << "attack.repetitions = 2\n";
  WriteFileAtomic(conf, c.str());
  auto run = [&] {
    std::map<std::string, std::string> files;
    std::vector<std::string> args = {"film", "--config", conf.string(), "train"};
    auto call = [](std::vector<std::string> a) {
      std::vector<char*> argv;
      for (auto& s : a) argv.push_back(s.data());
      return cli::RunCli(static_cast<int>(argv.size()), argv.data());
    };
    int rc = call(args);
    rc |= call({"film", "--config", conf.string(), "attack", "--out",
                (dir / "attack").string()});
    for (const char* sub : {"train", "attack"}) {
      for (const auto& e : fs::directory_iterator(dir / sub)) {
        files[std::string(sub) + "/" + e.path().filename().string()] =
            ReadFile(e.path());
      }
      fs::remove_all(dir / sub);
    }
    return std::make_pair(rc, files);
  };
  const auto [rc1, first] = run();
  const auto [rc2, second] = run();
  return {rc1 == 0 && rc2 == 0 && !first.empty() && first == second,
          Format("%zu output files, byte-identical across runs: %s", first.size(),
                 first == second ? "yes" : "no")};
}

}  // namespace
}  // namespace film::acceptance

int main(int argc, char** argv) {
  using namespace film::acceptance;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", GradientCorrectness},
      {"extraction exactness", ExtractionExactness},
      {"pruning defense", PruningDefense},
      {"dpsgd defense", DpsgdDefense},
      {"freezing defense", FreezingDefense},
      {"memorization recovery", MemorizationRecovery},
      {"batch-size trend", BatchSizeTrend},
      {"iteration trend", IterationTrend},
      {"reordering soundness", ReorderingSoundness},
      {"metric oracles", MetricOracles},
      {"multi-sentence trend", MultiSentenceTrend},
      {"n-gram penalty ablation", NgramAblation},
      {"determinism", Determinism},
  };
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    std::printf("criterion %2zu %-24s %s  %s  [%.1fs]\n", i + 1,
                criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
