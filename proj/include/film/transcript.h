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

// On-disk transcripts. A transcript directory holds
//
//   manifest.json                 configs and the entry index
//   vocab.txt                     one token per line
//   entry_<t>.params.ckpt         broadcast parameters at iteration t
//   entry_<t>.grads.ckpt          gradients the client transmitted
//   entry_<t>.batch.json          ground-truth batch, for scoring only

#ifndef FILM_TRANSCRIPT_H_
#define FILM_TRANSCRIPT_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "film/corpus.h"
#include "film/fedsim.h"
#include "film/model.h"

namespace film::fedsim {

inline constexpr char kManifestName[] = "manifest.json";

struct TranscriptIndex {
  struct Item {
    std::size_t iteration = 0;
    std::string params_file;
    std::string grads_file;
    std::string batch_file;  // empty when no ground truth was kept
  };

  std::filesystem::path dir;
  model::Hyperparams hyper;
  model::TrainConfig train_config;
  DefenseConfig defense;
  std::string corpus_path;
  corpus::Vocab vocab;
  std::vector<Item> entries;
};

void SaveTranscript(const std::filesystem::path& dir,
                    const Transcript& transcript, const corpus::Vocab& vocab,
                    const std::string& corpus_path);

// Reads the manifest and vocabulary; entries are loaded on demand.
TranscriptIndex LoadTranscriptIndex(const std::filesystem::path& dir);
TranscriptEntry LoadEntry(const TranscriptIndex& index, std::size_t i);

std::string BatchToJson(const corpus::Batch& batch, const corpus::Vocab& vocab);
corpus::Batch BatchFromJson(const std::string& text);

std::string DefenseKindName(DefenseKind kind);
// Accepts none, prune, dpsgd and freeze; throws ConfigError otherwise.
DefenseKind ParseDefenseKind(const std::string& name);

}  // namespace film::fedsim

#endif  // FILM_TRANSCRIPT_H_
