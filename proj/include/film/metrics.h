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

// Text recovery metrics: ROUGE-1/2/L F-scores, token-set precision/recall,
// named-entity recovery rate and multi-sentence recall/precision.

#ifndef FILM_METRICS_H_
#define FILM_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "film/attack.h"
#include "film/corpus.h"

namespace film::metrics {

using corpus::TokenId;
using TokenSeq = std::vector<TokenId>;

struct RougeScores {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
};

// Clipped n-gram overlap F1; 0 when either side has no n-grams.
double RougeN(std::span<const TokenId> candidate,
              std::span<const TokenId> reference, std::size_t n);
std::size_t LcsLength(std::span<const TokenId> a, std::span<const TokenId> b);
double RougeL(std::span<const TokenId> candidate,
              std::span<const TokenId> reference);
RougeScores Rouge(std::span<const TokenId> candidate,
                  std::span<const TokenId> reference);

struct TokenSetScores {
  double precision = 0.0;
  double recall = 0.0;
};

// Duplicates in either argument are ignored. Throws InvalidInput when
// `original` is empty.
TokenSetScores ComputeTokenSetScores(std::span<const TokenId> recovered,
                                     std::span<const TokenId> original);

// Fraction of the entity spans of `original` appearing as a contiguous run in
// some recovered sentence. Throws NoEntities when there are none.
double Nerr(std::span<const TokenSeq> recovered,
            const corpus::Sentence& original);

struct MultiSentenceScores {
  double recall = 0.0;
  double precision = 0.0;
};

// Recoveries are taken in order; each is paired with the unmatched batch
// sentence of highest ROUGE-L (lowest index on ties) and counts as a match
// when that score exceeds `threshold`.
MultiSentenceScores ComputeMultiSentenceScores(
    std::span<const TokenSeq> recoveries, std::span<const TokenSeq> batch,
    double threshold = 0.25);

// Index of the reference with the highest ROUGE-L (lowest index on ties).
std::size_t BestMatch(std::span<const TokenId> candidate,
                      std::span<const TokenSeq> references);

// Ground-truth token set an ideal bag extraction returns: batch tokens plus
// <bos>, sorted and unique.
std::vector<TokenId> BatchTokenSet(const corpus::Batch& batch);

struct SentenceReport {
  std::size_t repetition = 0;
  TokenSeq tokens;
  std::size_t matched_index = 0;  // into the batch
  RougeScores rouge;
};

struct EntryReport {
  std::size_t batch_size = 0;
  std::size_t iteration = 0;
  RougeScores rouge;            // best recovery vs its best-matching sentence
  std::optional<double> nerr;   // unset when that sentence has no entities
  TokenSetScores bag;           // extracted bag vs BatchTokenSet
  std::optional<MultiSentenceScores> multi;
  std::size_t repetitions = 0;
  std::vector<SentenceReport> sentences;  // one per repetition
};

// Scores the results of one attacked entry. An empty `results` means the
// attack found nothing (e.g. an empty bag) and scores zero everywhere.
// `multi` is filled when there is more than one repetition.
EntryReport ScoreEntry(std::span<const attack::AttackResult> results,
                       const corpus::Batch& batch, std::size_t iteration,
                       double threshold = 0.25);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t count = 0;
};

MeanStd Summarize(std::span<const double> values);

}  // namespace film::metrics

#endif  // FILM_METRICS_H_
