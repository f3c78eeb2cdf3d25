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

#include "film/transcript.h"

#include <cstdio>
#include <system_error>

#include "film/error.h"
#include "film/io.h"
#include "json.hpp"

namespace film::fedsim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kFormatVersion = 1;

std::string EntryStem(std::size_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "entry_%08zu", iteration);
  return buf;
}

json HyperToJson(const model::Hyperparams& h) {
  return {{"vocab_size", h.vocab_size},   {"hidden_dim", h.hidden_dim},
          {"n_layers", h.n_layers},       {"n_heads", h.n_heads},
          {"max_positions", h.max_positions},
          {"tie_embeddings", h.tie_embeddings}};
}

json TrainToJson(const model::TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"optimizer", c.optimizer == model::OptimizerKind::kAdam ? "adam" : "sgd"},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"iterations", c.iterations},
          {"batch_size", c.batch_size},
          {"freeze_embeddings", c.freeze_embeddings},
          {"seed", c.seed}};
}

json DefenseToJson(const DefenseConfig& d) {
  return {{"kind", DefenseKindName(d.kind)},
          {"prune_ratio", d.prune_ratio},
          {"clip_norm", d.clip_norm},
          {"noise_scale", d.noise_scale}};
}

template <typename T>
T Field(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kConfigError,
                where.string() + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfigError,
                where.string() + ": bad value for field '" + key + "'");
  }
}

}  // namespace

std::string DefenseKindName(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::kNone: return "none";
    case DefenseKind::kPrune: return "prune";
    case DefenseKind::kDpsgd: return "dpsgd";
    case DefenseKind::kFreezeEmbeddings: return "freeze";
  }
  return "none";
}

DefenseKind ParseDefenseKind(const std::string& name) {
  if (name == "none") return DefenseKind::kNone;
  if (name == "prune") return DefenseKind::kPrune;
  if (name == "dpsgd") return DefenseKind::kDpsgd;
  if (name == "freeze") return DefenseKind::kFreezeEmbeddings;
  throw Error(ErrorCode::kConfigError, "unknown defense '" + name + "'");
}

std::string BatchToJson(const corpus::Batch& batch, const corpus::Vocab& vocab) {
  json members = json::array();
  for (const auto& s : batch.members()) {
    json spans = json::array();
    for (const auto& e : s.entity_spans) spans.push_back({e.start, e.end});
    members.push_back({{"tokens", s.token_ids},
                       {"text", corpus::Detokenize(s.token_ids, vocab)},
                       {"entities", spans}});
  }
  return json{{"eval_only", true}, {"members", members}}.dump(1) + "\n";
}

corpus::Batch BatchFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("bad batch file: ") + e.what());
  }
  std::vector<corpus::Sentence> members;
  for (const auto& m : j.at("members")) {
    corpus::Sentence s;
    s.token_ids = m.at("tokens").get<std::vector<corpus::TokenId>>();
    s.raw_text = m.value("text", "");
    for (const auto& e : m.value("entities", json::array())) {
      s.entity_spans.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>()});
    }
    members.push_back(std::move(s));
  }
  return corpus::Batch(std::move(members));
}

void SaveTranscript(const fs::path& dir, const Transcript& transcript,
                    const corpus::Vocab& vocab, const std::string& corpus_path) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());

  json entries = json::array();
  for (const auto& e : transcript.entries) {
    const std::string stem = EntryStem(e.iteration);
    json item = {{"iteration", e.iteration},
                 {"params", stem + ".params.ckpt"},
                 {"grads", stem + ".grads.ckpt"}};
    SaveTensors(e.params.tensors, dir / (stem + ".params.ckpt"));
    SaveTensors(e.transmitted.tensors, dir / (stem + ".grads.ckpt"));
    if (e.eval_only_batch) {
      item["batch"] = stem + ".batch.json";
      WriteFileAtomic(dir / (stem + ".batch.json"),
                      BatchToJson(*e.eval_only_batch, vocab));
    }
    entries.push_back(std::move(item));
  }
  vocab.Save(dir / "vocab.txt");
  json manifest = {{"format", "film-transcript"},
                   {"version", kFormatVersion},
                   {"corpus", corpus_path},
                   {"vocab", "vocab.txt"},
                   {"hyper", HyperToJson(transcript.hyper)},
                   {"train", TrainToJson(transcript.train_config)},
                   {"defense", DefenseToJson(transcript.defense)},
                   {"entries", entries}};
  WriteFileAtomic(dir / kManifestName, manifest.dump(2) + "\n");
}

TranscriptIndex LoadTranscriptIndex(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) {
    throw Error(ErrorCode::kIoError,
                "no transcript manifest at " + manifest_path.string());
  }
  json j;
  try {
    j = json::parse(ReadFile(manifest_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                manifest_path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "film-transcript" ||
      j.value("version", 0) != kFormatVersion) {
    throw Error(ErrorCode::kConfigError,
                manifest_path.string() + ": not a version 1 transcript");
  }
  TranscriptIndex index;
  index.dir = dir;
  index.corpus_path = j.value("corpus", "");
  index.vocab = corpus::Vocab::Load(dir / Field<std::string>(j, "vocab", manifest_path));

  const json& h = j.at("hyper");
  index.hyper.vocab_size = Field<std::size_t>(h, "vocab_size", manifest_path);
  index.hyper.hidden_dim = Field<std::size_t>(h, "hidden_dim", manifest_path);
  index.hyper.n_layers = Field<std::size_t>(h, "n_layers", manifest_path);
  index.hyper.n_heads = Field<std::size_t>(h, "n_heads", manifest_path);
  index.hyper.max_positions = Field<std::size_t>(h, "max_positions", manifest_path);
  index.hyper.tie_embeddings = Field<bool>(h, "tie_embeddings", manifest_path);
  index.hyper.Validate();

  const json& t = j.at("train");
  auto& tc = index.train_config;
  tc.learning_rate = Field<double>(t, "learning_rate", manifest_path);
  tc.optimizer = Field<std::string>(t, "optimizer", manifest_path) == "sgd"
                     ? model::OptimizerKind::kSgd
                     : model::OptimizerKind::kAdam;
  tc.adam_beta1 = Field<double>(t, "adam_beta1", manifest_path);
  tc.adam_beta2 = Field<double>(t, "adam_beta2", manifest_path);
  tc.adam_epsilon = Field<double>(t, "adam_epsilon", manifest_path);
  tc.iterations = Field<std::size_t>(t, "iterations", manifest_path);
  tc.batch_size = Field<std::size_t>(t, "batch_size", manifest_path);
  tc.freeze_embeddings = Field<bool>(t, "freeze_embeddings", manifest_path);
  tc.seed = Field<std::uint64_t>(t, "seed", manifest_path);

  const json& d = j.at("defense");
  index.defense.kind = ParseDefenseKind(Field<std::string>(d, "kind", manifest_path));
  index.defense.prune_ratio = Field<double>(d, "prune_ratio", manifest_path);
  index.defense.clip_norm = Field<double>(d, "clip_norm", manifest_path);
  index.defense.noise_scale = Field<double>(d, "noise_scale", manifest_path);

  for (const auto& e : j.at("entries")) {
    TranscriptIndex::Item item;
    item.iteration = Field<std::size_t>(e, "iteration", manifest_path);
    item.params_file = Field<std::string>(e, "params", manifest_path);
    item.grads_file = Field<std::string>(e, "grads", manifest_path);
    item.batch_file = e.value("batch", "");
    index.entries.push_back(std::move(item));
  }
  return index;
}

TranscriptEntry LoadEntry(const TranscriptIndex& index, std::size_t i) {
  const auto& item = index.entries.at(i);
  TranscriptEntry entry;
  entry.iteration = item.iteration;
  entry.params = model::LoadParams(index.hyper, index.dir / item.params_file);
  NamedTensors grads = LoadTensors(index.dir / item.grads_file);
  if (!grads.SameShapes(entry.params.tensors)) {
    throw Error(ErrorCode::kCheckpointMismatch,
                item.grads_file + " does not match the model layout");
  }
  entry.transmitted.tensors = std::move(grads);
  if (!item.batch_file.empty()) {
    entry.eval_only_batch = BatchFromJson(ReadFile(index.dir / item.batch_file));
  }
  return entry;
}

}  // namespace film::fedsim
