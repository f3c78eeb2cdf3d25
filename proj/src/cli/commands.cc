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

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "film/attack.h"
#include "film/cli.h"
#include "film/corpus.h"
#include "film/error.h"
#include "film/io.h"
#include "film/metrics.h"
#include "film/transcript.h"
#include "json.hpp"

namespace film::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr char kResolvedConfig[] = "config.resolved";
constexpr char kResults[] = "results.jsonl";
constexpr char kTruth[] = "truth.jsonl";
constexpr char kMetrics[] = "metrics.json";

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
}

void RequireFile(const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kIoError,
                std::string(what) + " not found: " + path.string());
  }
}

std::string Real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0;
  for (std::uint64_t p : parts) h = Mix(h ^ Mix(p));
  return h;
}

// Runs fn(0..n-1) on up to `jobs` threads. Results must be written to
// per-index slots; the first failure (by index) is rethrown.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(jobs, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ordered_json BeamConfigJson(const attack::BeamSearchConfig& c) {
  return {{"k", c.beam_size},       {"max_length", c.max_length},
          {"ngram", c.ngram},       {"penalty", c.penalty},
          {"prompt_fallback", c.prompt_fallback},
          {"oracle_caps", c.token_caps.has_value()}};
}

ordered_json ReorderConfigJson(const attack::ReorderConfig& c) {
  return {{"beta", c.beta},
          {"steps", c.steps_per_stage},
          {"cuts", c.cuts},
          {"candidates", c.candidates_per_step},
          {"seed", c.seed}};
}

ordered_json Nullable(std::optional<double> v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json FiniteOrNull(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

// One attacked update: which entry, and which batch.
struct Job {
  std::size_t entry = 0;       // position among loaded entries
  std::size_t batch_size = 0;  // 0: the recorded training batch
  std::size_t probe = 0;
  attack::AttackOptions options;
  fedsim::DefenseConfig defense;
};

struct JobOutput {
  std::size_t iteration = 0;
  std::optional<corpus::Batch> batch;
  std::vector<attack::AttackResult> results;
  metrics::EntryReport report;
};

// Everything an attack run reads from disk.
struct AttackInputs {
  fedsim::TranscriptIndex index;
  std::vector<fedsim::TranscriptEntry> entries;  // selected, in order
  std::optional<corpus::Corpus> corpus;          // for probe batches
};

AttackInputs LoadInputs(const ExperimentConfig& config,
                        std::span<const std::size_t> iterations,
                        bool need_corpus) {
  if (config.transcript.empty()) {
    throw Error(ErrorCode::kConfigError, "attack.transcript is not set");
  }
  AttackInputs in;
  in.index = fedsim::LoadTranscriptIndex(config.transcript);
  std::vector<std::size_t> picks;
  if (iterations.empty()) {
    for (std::size_t i = 0; i < in.index.entries.size(); ++i) picks.push_back(i);
  } else {
    for (std::size_t t : iterations) {
      auto it = std::find_if(in.index.entries.begin(), in.index.entries.end(),
                             [&](const auto& e) { return e.iteration == t; });
      if (it == in.index.entries.end()) {
        throw Error(ErrorCode::kConfigError,
                    "transcript " + config.transcript + " has no entry for iteration " +
                        std::to_string(t));
      }
      picks.push_back(static_cast<std::size_t>(it - in.index.entries.begin()));
    }
  }
  for (std::size_t i : picks) in.entries.push_back(fedsim::LoadEntry(in.index, i));
  if (need_corpus) {
    const std::string path =
        config.corpus_train.empty() ? in.index.corpus_path : config.corpus_train;
    RequireFile(path, "corpus file");
    in.corpus = corpus::LoadCorpus(path, in.index.vocab);
  }
  return in;
}

attack::AttackOptions BaseOptions(const ExperimentConfig& config) {
  attack::AttackOptions o;
  o.beam = config.beam;
  o.reorder = config.reorder;
  o.reorder.seed = config.seed;
  o.score_runner_ups = config.score_runner_ups;
  return o;
}

// Extraction used against `defense` for a batch of `b` rows.
attack::ExtractionMode ChooseExtraction(const ExperimentConfig& config,
                                        const fedsim::DefenseConfig& defense,
                                        std::size_t b, std::size_t hidden_dim) {
  if (config.extraction == "exact") return attack::ExtractionMode::Exact();
  if (config.extraction == "threshold") {
    return attack::ExtractionMode::Threshold(config.tau);
  }
  if (defense.kind == fedsim::DefenseKind::kDpsgd && defense.noise_scale > 0.0) {
    // Per-entry noise on the averaged update has std sigma * C / b.
    const double std_dev =
        defense.noise_scale * defense.clip_norm / static_cast<double>(b);
    return attack::ExtractionMode::Threshold(
        attack::DpsgdThreshold(std_dev, hidden_dim));
  }
  return attack::ExtractionMode::Exact();
}

void FinishReport(const ExperimentConfig& config, JobOutput& out) {
  out.report = metrics::ScoreEntry(out.results, *out.batch, out.iteration,
                                   config.match_threshold);
  out.report.repetitions = config.repetitions;
  if (config.repetitions > 1 && !out.report.multi) {
    out.report.multi = metrics::MultiSentenceScores{};
  }
}

JobOutput RunJob(const Job& job, const ExperimentConfig& config,
                 const AttackInputs& in) {
  const fedsim::TranscriptEntry& entry = in.entries[job.entry];
  JobOutput out;
  out.iteration = entry.iteration;
  std::optional<fedsim::TranscriptEntry> probe;
  const fedsim::TranscriptEntry* target = &entry;
  if (job.batch_size == 0) {
    if (!entry.eval_only_batch) {
      throw Error(ErrorCode::kConfigError,
                  "transcript entry " + std::to_string(entry.iteration) +
                      " has no recorded batch to score against");
    }
  } else {
    Rng batch_rng(DeriveSeed({config.seed, 0xBA7C4ULL, job.batch_size, job.probe}));
    Rng noise_rng(DeriveSeed({config.seed, 0x7015EULL, job.batch_size, job.probe}));
    corpus::Batch batch = corpus::SampleBatch(*in.corpus, job.batch_size, batch_rng);
    probe = fedsim::Observe(entry.params, batch, entry.iteration, job.defense,
                            noise_rng);
    target = &*probe;
  }
  out.batch = *target->eval_only_batch;

  attack::AttackOptions options = job.options;
  options.extraction = ChooseExtraction(config, job.defense, out.batch->size(),
                                        in.index.hyper.hidden_dim);
  if (config.beam_oracle_caps) {
    std::map<corpus::TokenId, std::size_t> caps;
    for (const auto& s : out.batch->members()) {
      for (corpus::TokenId id : s.token_ids) ++caps[id];
    }
    options.beam.token_caps = std::move(caps);
  }
  try {
    out.results = attack::RecoverMultiple(target->observed(), in.index.vocab,
                                          options, config.repetitions,
                                          config.ban_order);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyBag) throw;
  }
  FinishReport(config, out);
  return out;
}

ordered_json RougeJson(const metrics::RougeScores& r) {
  return {{"rouge1", r.rouge1}, {"rouge2", r.rouge2}, {"rougeL", r.rougeL}};
}

ordered_json ReportJson(std::size_t entry, std::size_t probe,
                        const metrics::EntryReport& r,
                        const corpus::Vocab& vocab) {
  ordered_json j = {{"entry", entry},
                    {"batch_size", r.batch_size},
                    {"iteration", r.iteration},
                    {"probe", probe},
                    {"rouge1", r.rouge.rouge1},
                    {"rouge2", r.rouge.rouge2},
                    {"rougeL", r.rouge.rougeL},
                    {"nerr", Nullable(r.nerr)},
                    {"precision", r.bag.precision},
                    {"recall", r.bag.recall}};
  if (r.multi) {
    j["multi"] = {{"recall", r.multi->recall},
                  {"precision", r.multi->precision},
                  {"R", r.repetitions}};
  } else {
    j["multi"] = nullptr;
  }
  ordered_json sentences = ordered_json::array();
  for (const auto& s : r.sentences) {
    ordered_json sj = {{"repetition", s.repetition},
                       {"tokens", s.tokens},
                       {"text", corpus::Detokenize(s.tokens, vocab)},
                       {"matched_index", s.matched_index}};
    sj.update(RougeJson(s.rouge));
    sentences.push_back(std::move(sj));
  }
  j["sentences"] = std::move(sentences);
  return j;
}

ordered_json SummaryJson(std::span<const metrics::EntryReport> reports) {
  std::map<std::string, std::vector<double>> cols;
  const char* order[] = {"rouge1",    "rouge2",        "rougeL",
                         "nerr",      "precision",     "recall",
                         "multi_recall", "multi_precision"};
  for (const char* k : order) cols[k];
  for (const auto& r : reports) {
    cols["rouge1"].push_back(r.rouge.rouge1);
    cols["rouge2"].push_back(r.rouge.rouge2);
    cols["rougeL"].push_back(r.rouge.rougeL);
    if (r.nerr) cols["nerr"].push_back(*r.nerr);
    cols["precision"].push_back(r.bag.precision);
    cols["recall"].push_back(r.bag.recall);
    if (r.multi) {
      cols["multi_recall"].push_back(r.multi->recall);
      cols["multi_precision"].push_back(r.multi->precision);
    }
  }
  ordered_json j;
  j["entries"] = reports.size();
  for (const char* k : order) {
    const metrics::MeanStd m = metrics::Summarize(cols[k]);
    j[k] = {{"mean", m.mean}, {"std", m.std}, {"count", m.count}};
  }
  return j;
}

std::string MetricsFileText(std::span<const metrics::EntryReport> reports,
                            std::span<const std::size_t> probes,
                            const corpus::Vocab& vocab) {
  ordered_json entries = ordered_json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    entries.push_back(ReportJson(i, probes[i], reports[i], vocab));
  }
  ordered_json j = {{"summary", SummaryJson(reports)}, {"entries", entries}};
  return j.dump(2) + "\n";
}

void WriteEcho(const fs::path& dir, const ExperimentConfig& config) {
  WriteFileAtomic(dir / kResolvedConfig, ConfigToText(config));
}

}  // namespace

void CmdTrain(const ExperimentConfig& config) {
  config.Validate();
  if (config.corpus_train.empty()) {
    throw Error(ErrorCode::kConfigError, "corpus.train is not set");
  }
  RequireFile(config.corpus_train, "corpus file");
  corpus::Vocab vocab;
  if (config.corpus_vocab.empty()) {
    vocab = corpus::BuildVocab(corpus::ReadLines(config.corpus_train),
                               config.corpus_vocab_size);
  } else {
    RequireFile(config.corpus_vocab, "vocab file");
    vocab = corpus::Vocab::Load(config.corpus_vocab);
  }
  const corpus::Corpus data = corpus::LoadCorpus(config.corpus_train, vocab);

  model::Hyperparams hyper = config.hyper;
  hyper.vocab_size = vocab.size();
  model::TrainConfig train = config.train;
  train.seed = config.seed;
  fedsim::TrainingRun run = fedsim::RunTraining(data, hyper, train, config.defense,
                                                config.capture_every);
  for (double loss : run.loss_curve) {
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kNumericalFailure, "training loss diverged");
    }
  }
  const fs::path out = config.out;
  EnsureDir(out);
  fedsim::SaveTranscript(out, run.transcript, vocab, config.corpus_train);
  model::SaveParams(run.final_params, out / "final.params.ckpt");
  std::string csv = "iteration,loss\n";
  for (std::size_t t = 0; t < run.loss_curve.size(); ++t) {
    csv += std::to_string(t) + "," + Real(run.loss_curve[t]) + "\n";
  }
  WriteFileAtomic(out / "loss.csv", csv);
  WriteEcho(out, config);
}

void CmdAttack(const ExperimentConfig& config) {
  config.Validate();
  const bool probing = !config.attack_batch_sizes.empty();
  const AttackInputs in = LoadInputs(config, config.attack_iterations, probing);

  std::vector<Job> jobs;
  for (std::size_t e = 0; e < in.entries.size(); ++e) {
    Job job;
    job.entry = e;
    job.options = BaseOptions(config);
    job.defense = in.index.defense;
    if (!probing) {
      jobs.push_back(job);
      continue;
    }
    for (std::size_t b : config.attack_batch_sizes) {
      for (std::size_t p = 0; p < config.attack_probes; ++p) {
        job.batch_size = b;
        job.probe = p;
        jobs.push_back(job);
      }
    }
  }
  std::vector<JobOutput> outputs(jobs.size());
  ParallelFor(jobs.size(), config.jobs,
              [&](std::size_t i) { outputs[i] = RunJob(jobs[i], config, in); });

  const corpus::Vocab& vocab = in.index.vocab;
  std::string results, truth;
  std::vector<metrics::EntryReport> reports;
  std::vector<std::size_t> probes;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const JobOutput& o = outputs[i];
    for (std::size_t r = 0; r < o.results.size(); ++r) {
      const attack::AttackResult& res = o.results[r];
      ordered_json configs = {{"beam", BeamConfigJson(res.beam_config)},
                              {"reorder", ReorderConfigJson(res.reorder_config)}};
      for (const auto& s : res.recovered) {
        ordered_json line = {{"entry", i},
                             {"iteration", res.iteration},
                             {"batch_size", o.batch->size()},
                             {"repetition", r},
                             {"rank", s.rank},
                             {"tokens", s.tokens},
                             {"text", corpus::Detokenize(s.tokens, vocab)},
                             {"prior_score", FiniteOrNull(s.prior_score)},
                             {"beam_score", FiniteOrNull(s.beam_score)},
                             {"configs", configs}};
        results += line.dump() + "\n";
      }
    }
    ordered_json t = {{"entry", i},
                      {"eval_only", true},
                      {"iteration", o.iteration},
                      {"batch_size", o.batch->size()},
                      {"probe", jobs[i].probe},
                      {"repetitions", config.repetitions},
                      {"empty", o.results.empty()},
                      {"bag", o.results.empty() ? std::vector<corpus::TokenId>{}
                                                : o.results.front().bag.token_ids},
                      {"batch", ordered_json::parse(fedsim::BatchToJson(*o.batch, vocab))}};
    truth += t.dump() + "\n";
    reports.push_back(o.report);
    probes.push_back(jobs[i].probe);
  }
  const fs::path out = config.out;
  EnsureDir(out);
  WriteFileAtomic(out / kResults, results);
  WriteFileAtomic(out / kTruth, truth);
  WriteFileAtomic(out / kMetrics, MetricsFileText(reports, probes, vocab));
  WriteEcho(out, config);
}

void CmdMetrics(const ExperimentConfig& config) {
  config.Validate();
  const fs::path dir =
      config.metrics_results.empty() ? fs::path(config.out) : fs::path(config.metrics_results);
  RequireFile(dir / kResults, "results file");
  RequireFile(dir / kTruth, "ground-truth file");
  corpus::Vocab vocab;
  if (!config.transcript.empty()) {
    vocab = fedsim::LoadTranscriptIndex(config.transcript).vocab;
  } else {
    throw Error(ErrorCode::kConfigError,
                "attack.transcript is needed to decode token ids");
  }

  struct Parsed {
    std::size_t iteration = 0;
    std::size_t probe = 0;
    std::size_t repetitions = 1;
    bool empty = false;
    std::vector<corpus::TokenId> bag;
    std::optional<corpus::Batch> batch;
    std::vector<std::optional<attack::TokenSeq>> best;  // by repetition
  };
  std::vector<Parsed> entries;
  auto parse_lines = [](const std::string& text, auto fn) {
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      try {
        fn(json::parse(line));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kConfigError,
                    "line " + std::to_string(n) + ": " + e.what());
      }
    }
  };
  parse_lines(ReadFile(dir / kTruth), [&](const json& j) {
    Parsed p;
    p.iteration = j.at("iteration").get<std::size_t>();
    p.probe = j.at("probe").get<std::size_t>();
    p.repetitions = j.at("repetitions").get<std::size_t>();
    p.empty = j.at("empty").get<bool>();
    p.bag = j.at("bag").get<std::vector<corpus::TokenId>>();
    p.batch = fedsim::BatchFromJson(j.at("batch").dump());
    p.best.resize(p.repetitions);
    entries.push_back(std::move(p));
  });
  parse_lines(ReadFile(dir / kResults), [&](const json& j) {
    const auto e = j.at("entry").get<std::size_t>();
    const auto r = j.at("repetition").get<std::size_t>();
    if (e >= entries.size() || r >= entries[e].best.size()) {
      throw Error(ErrorCode::kConfigError, "result refers to an unknown entry");
    }
    if (j.at("rank").get<std::size_t>() == 0) {
      entries[e].best[r] = j.at("tokens").get<attack::TokenSeq>();
    }
  });

  ExperimentConfig scoring = config;
  std::vector<metrics::EntryReport> reports;
  std::vector<std::size_t> probes;
  for (auto& p : entries) {
    JobOutput o;
    o.iteration = p.iteration;
    o.batch = std::move(p.batch);
    if (!p.empty) {
      for (auto& best : p.best) {
        if (!best) {
          throw Error(ErrorCode::kConfigError, "results are missing a repetition");
        }
        attack::AttackResult res;
        res.iteration = p.iteration;
        res.bag.token_ids = p.bag;
        res.recovered.push_back({0, std::move(*best), 0.0, 0.0});
        o.results.push_back(std::move(res));
      }
    }
    scoring.repetitions = p.repetitions;
    FinishReport(scoring, o);
    reports.push_back(std::move(o.report));
    probes.push_back(p.probe);
  }
  const fs::path out = config.out;
  EnsureDir(out);
  WriteFileAtomic(out / kMetrics, MetricsFileText(reports, probes, vocab));
  WriteEcho(out, config);
}

void CmdSweep(const ExperimentConfig& config) {
  config.Validate();
  static const std::vector<std::string> kAxes = {
      "batch_size", "iteration", "beam_size", "ngram",
      "beta",       "prune_ratio", "sigma"};
  const std::string& axis = config.sweep_axis;
  if (std::find(kAxes.begin(), kAxes.end(), axis) == kAxes.end()) {
    throw Error(ErrorCode::kConfigError,
                "unknown sweep axis '" + axis +
                    "' (batch_size, iteration, beam_size, ngram, beta, "
                    "prune_ratio, sigma)");
  }
  static const std::map<std::string, std::vector<double>> kDefaultValues = {
      {"batch_size", {1, 16, 64, 128}}, {"beam_size", {1, 4, 16, 32}},
      {"ngram", {1, 2, 3, 4}},          {"beta", {0, 0.5, 1, 2}},
      {"prune_ratio", {0, 0.9, 0.99, 0.999}},
      {"sigma", {0, 0.5, 1, 2}}};
  if (config.transcript.empty()) {
    throw Error(ErrorCode::kConfigError, "attack.transcript is not set");
  }
  std::vector<double> values = config.sweep_values;
  if (values.empty() && axis == "iteration") {
    for (const auto& e : fedsim::LoadTranscriptIndex(config.transcript).entries) {
      values.push_back(static_cast<double>(e.iteration));
    }
  } else if (values.empty()) {
    values = kDefaultValues.at(axis);
  }
  auto as_count = [&](double v) {
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw Error(ErrorCode::kConfigError,
                  "sweep value " + Real(v) + " must be a positive integer for " + axis);
    }
    return static_cast<std::size_t>(v);
  };

  std::vector<std::size_t> iterations;
  if (axis == "iteration") {
    for (double v : values) {
      if (!(v >= 0.0) || v != std::floor(v)) {
        throw Error(ErrorCode::kConfigError, "iteration values must be counts");
      }
      iterations.push_back(static_cast<std::size_t>(v));
    }
  } else if (config.sweep_iteration >= 0) {
    iterations.push_back(static_cast<std::size_t>(config.sweep_iteration));
  }
  AttackInputs in = LoadInputs(config, iterations, true);
  if (in.entries.empty()) {
    throw Error(ErrorCode::kConfigError, "transcript has no entries to sweep over");
  }

  std::vector<Job> jobs;
  std::vector<std::size_t> point_of;
  for (std::size_t v = 0; v < values.size(); ++v) {
    const double value = values[v];
    Job job;
    job.entry = axis == "iteration" ? v
                : config.sweep_iteration >= 0 ? 0
                                              : in.entries.size() - 1;
    job.batch_size = config.sweep_batch_size;
    job.options = BaseOptions(config);
    job.defense = in.index.defense;
    if (axis == "batch_size") {
      job.batch_size = as_count(value);
    } else if (axis == "beam_size") {
      job.options.beam.beam_size = as_count(value);
    } else if (axis == "ngram") {
      job.options.beam.ngram = as_count(value);
    } else if (axis == "beta") {
      if (!(value >= 0.0)) throw Error(ErrorCode::kConfigError, "beta must be >= 0");
      job.options.reorder.beta = value;
    } else if (axis == "prune_ratio") {
      try {
        job.defense = fedsim::DefenseConfig::Prune(value);
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfigError, e.detail());
      }
    } else if (axis == "sigma") {
      try {
        job.defense = fedsim::DefenseConfig::Dpsgd(config.defense.clip_norm, value);
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfigError, e.detail());
      }
    }
    for (std::size_t p = 0; p < config.sweep_probes; ++p) {
      job.probe = p;
      jobs.push_back(job);
      point_of.push_back(v);
    }
  }
  ExperimentConfig single = config;
  single.repetitions = 1;
  std::vector<JobOutput> outputs(jobs.size());
  ParallelFor(jobs.size(), config.jobs,
              [&](std::size_t i) { outputs[i] = RunJob(jobs[i], single, in); });

  std::string csv = "axis_value,rouge1,rouge2,rougeL,nerr,precision,recall\n";
  for (std::size_t v = 0; v < values.size(); ++v) {
    std::vector<double> r1, r2, rl, ne, pr, rc;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (point_of[i] != v) continue;
      const auto& r = outputs[i].report;
      r1.push_back(r.rouge.rouge1);
      r2.push_back(r.rouge.rouge2);
      rl.push_back(r.rouge.rougeL);
      if (r.nerr) ne.push_back(*r.nerr);
      pr.push_back(r.bag.precision);
      rc.push_back(r.bag.recall);
    }
    auto mean = [](const std::vector<double>& xs) {
      return metrics::Summarize(xs).mean;
    };
    char nerr[32] = "";
    if (!ne.empty()) std::snprintf(nerr, sizeof(nerr), "%.6f", mean(ne));
    char row[256];
    std::snprintf(row, sizeof(row), "%s,%.6f,%.6f,%.6f,%s,%.6f,%.6f\n",
                  Real(values[v]).c_str(), mean(r1), mean(r2), mean(rl), nerr,
                  mean(pr), mean(rc));
    csv += row;
  }
  const fs::path out = config.out;
  EnsureDir(out);
  WriteFileAtomic(out / ("sweep_" + axis + ".csv"), csv);
  WriteEcho(out, config);
}

}  // namespace film::cli
