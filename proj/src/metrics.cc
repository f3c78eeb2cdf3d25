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

#include "film/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "film/error.h"

namespace film::metrics {
namespace {

std::map<TokenSeq, std::size_t> NgramCounts(std::span<const TokenId> tokens,
                                            std::size_t n) {
  std::map<TokenSeq, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    auto w = tokens.subspan(i, n);
    ++counts[TokenSeq(w.begin(), w.end())];
  }
  return counts;
}

double F1(double overlap, double n_cand, double n_ref) {
  if (overlap == 0.0) return 0.0;
  const double p = overlap / n_cand;
  const double r = overlap / n_ref;
  return 2.0 * p * r / (p + r);
}

bool ContainsRun(std::span<const TokenId> haystack,
                 std::span<const TokenId> needle) {
  return !needle.empty() &&
         std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

}  // namespace

double RougeN(std::span<const TokenId> candidate,
              std::span<const TokenId> reference, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::kInvalidInput, "n-gram order must be >= 1");
  if (candidate.size() < n || reference.size() < n) return 0.0;
  const auto cand = NgramCounts(candidate, n);
  const auto ref = NgramCounts(reference, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return F1(static_cast<double>(overlap),
            static_cast<double>(candidate.size() - n + 1),
            static_cast<double>(reference.size() - n + 1));
}

std::size_t LcsLength(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double RougeL(std::span<const TokenId> candidate,
              std::span<const TokenId> reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  return F1(static_cast<double>(LcsLength(candidate, reference)),
            static_cast<double>(candidate.size()),
            static_cast<double>(reference.size()));
}

RougeScores Rouge(std::span<const TokenId> candidate,
                  std::span<const TokenId> reference) {
  return {RougeN(candidate, reference, 1), RougeN(candidate, reference, 2),
          RougeL(candidate, reference)};
}

TokenSetScores ComputeTokenSetScores(std::span<const TokenId> recovered,
                                     std::span<const TokenId> original) {
  const std::set<TokenId> s(original.begin(), original.end());
  if (s.empty()) {
    throw Error(ErrorCode::kInvalidInput, "original token set is empty");
  }
  const std::set<TokenId> r(recovered.begin(), recovered.end());
  if (r.empty()) return {};
  std::size_t common = 0;
  for (TokenId id : r) common += s.count(id);
  return {static_cast<double>(common) / static_cast<double>(r.size()),
          static_cast<double>(common) / static_cast<double>(s.size())};
}

double Nerr(std::span<const TokenSeq> recovered,
            const corpus::Sentence& original) {
  if (original.entity_spans.empty()) {
    throw Error(ErrorCode::kNoEntities, "sentence has no entity spans");
  }
  std::size_t hits = 0;
  for (const auto& span : original.entity_spans) {
    std::span<const TokenId> needle(original.token_ids.data() + span.start,
                                    span.end - span.start);
    for (const auto& r : recovered) {
      if (ContainsRun(r, needle)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) /
         static_cast<double>(original.entity_spans.size());
}

std::size_t BestMatch(std::span<const TokenId> candidate,
                      std::span<const TokenSeq> references) {
  if (references.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no reference sentences");
  }
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    const double s = RougeL(candidate, references[i]);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

MultiSentenceScores ComputeMultiSentenceScores(
    std::span<const TokenSeq> recoveries, std::span<const TokenSeq> batch,
    double threshold) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidInput, "batch is empty");
  if (recoveries.empty()) return {};
  std::vector<bool> taken(batch.size(), false);
  std::size_t matched = 0;
  for (const auto& rec : recoveries) {
    std::size_t best = batch.size();
    double best_score = -1.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (taken[i]) continue;
      const double s = RougeL(rec, batch[i]);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (best < batch.size() && best_score > threshold) {
      taken[best] = true;
      ++matched;
    }
  }
  return {static_cast<double>(matched) / static_cast<double>(batch.size()),
          static_cast<double>(matched) / static_cast<double>(recoveries.size())};
}

std::vector<TokenId> BatchTokenSet(const corpus::Batch& batch) {
  std::set<TokenId> ids{corpus::kBosId};
  for (std::size_t r = 0; r < batch.size(); ++r) {
    for (TokenId id : batch.tokens(r)) ids.insert(id);
  }
  return {ids.begin(), ids.end()};
}

EntryReport ScoreEntry(std::span<const attack::AttackResult> results,
                       const corpus::Batch& batch, std::size_t iteration,
                       double threshold) {
  EntryReport report;
  report.batch_size = batch.size();
  report.iteration = iteration;
  report.repetitions = results.size();
  const std::vector<corpus::Sentence>& members = batch.members();
  std::vector<TokenSeq> truth;
  truth.reserve(members.size());
  for (const auto& s : members) truth.push_back(s.token_ids);

  const std::vector<TokenId> truth_set = BatchTokenSet(batch);
  if (results.empty()) {
    report.bag = ComputeTokenSetScores({}, truth_set);
    for (const auto& s : members) {
      if (!s.entity_spans.empty()) {
        report.nerr = 0.0;
        break;
      }
    }
    return report;
  }

  report.bag = ComputeTokenSetScores(results.front().bag.token_ids, truth_set);
  std::vector<TokenSeq> recovered;
  for (std::size_t r = 0; r < results.size(); ++r) {
    const TokenSeq& tokens = results[r].best().tokens;
    recovered.push_back(tokens);
    SentenceReport sr;
    sr.repetition = r;
    sr.tokens = tokens;
    sr.matched_index = BestMatch(tokens, truth);
    sr.rouge = Rouge(tokens, truth[sr.matched_index]);
    report.sentences.push_back(std::move(sr));
  }
  const SentenceReport& first = report.sentences.front();
  report.rouge = first.rouge;
  const corpus::Sentence& target = members[first.matched_index];
  if (!target.entity_spans.empty()) report.nerr = Nerr(recovered, target);
  if (results.size() > 1) {
    report.multi = ComputeMultiSentenceScores(recovered, truth, threshold);
  }
  return report;
}

MeanStd Summarize(std::span<const double> values) {
  MeanStd out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(values.size()));
  return out;
}

}  // namespace film::metrics
