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

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "film/cli.h"
#include "film/error.h"
#include "film/io.h"
#include "film/transcript.h"

namespace film::cli {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void Bad(const std::string& key, const std::string& value,
                      const char* what) {
  throw Error(ErrorCode::kConfigError,
              key + " = '" + value + "': expected " + what);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    Bad(key, v, std::is_floating_point_v<T> ? "a number" : "an integer");
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Bad(key, v, "true or false");
}

template <typename T>
std::vector<T> ParseList(const std::string& key, const std::string& v) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (item.empty()) continue;
    out.push_back(ParseNumber<T>(key, item));
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
std::string FormatList(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += FormatDouble(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

struct Key {
  const char* name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define FILM_SIZE_KEY(NAME, FIELD)                                        \
  Key{NAME,                                                               \
      [](ExperimentConfig& c, const std::string& v) {                     \
        c.FIELD = ParseNumber<std::size_t>(NAME, v);                      \
      },                                                                  \
      [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }}
#define FILM_REAL_KEY(NAME, FIELD)                                        \
  Key{NAME,                                                               \
      [](ExperimentConfig& c, const std::string& v) {                     \
        c.FIELD = ParseNumber<double>(NAME, v);                           \
      },                                                                  \
      [](const ExperimentConfig& c) { return FormatDouble(c.FIELD); }}
#define FILM_BOOL_KEY(NAME, FIELD)                                        \
  Key{NAME,                                                               \
      [](ExperimentConfig& c, const std::string& v) {                     \
        c.FIELD = ParseBool(NAME, v);                                     \
      },                                                                  \
      [](const ExperimentConfig& c) {                                     \
        return std::string(c.FIELD ? "true" : "false");                   \
      }}
#define FILM_STRING_KEY(NAME, FIELD)                                      \
  Key{NAME, [](ExperimentConfig& c, const std::string& v) { c.FIELD = v; }, \
      [](const ExperimentConfig& c) { return c.FIELD; }}

const std::vector<Key>& Keys() {
  static const std::vector<Key> keys = {
      Key{"seed",
          [](ExperimentConfig& c, const std::string& v) {
            c.seed = ParseNumber<std::uint64_t>("seed", v);
          },
          [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      FILM_STRING_KEY("out", out),
      FILM_SIZE_KEY("jobs", jobs),

      FILM_STRING_KEY("corpus.train", corpus_train),
      FILM_STRING_KEY("corpus.vocab", corpus_vocab),
      FILM_SIZE_KEY("corpus.vocab_size", corpus_vocab_size),

      FILM_SIZE_KEY("model.hidden_dim", hyper.hidden_dim),
      FILM_SIZE_KEY("model.n_layers", hyper.n_layers),
      FILM_SIZE_KEY("model.n_heads", hyper.n_heads),
      FILM_SIZE_KEY("model.max_positions", hyper.max_positions),
      FILM_BOOL_KEY("model.tie_embeddings", hyper.tie_embeddings),

      FILM_SIZE_KEY("train.iterations", train.iterations),
      FILM_SIZE_KEY("train.batch_size", train.batch_size),
      FILM_REAL_KEY("train.learning_rate", train.learning_rate),
      Key{"train.optimizer",
          [](ExperimentConfig& c, const std::string& v) {
            if (v == "adam") {
              c.train.optimizer = model::OptimizerKind::kAdam;
            } else if (v == "sgd") {
              c.train.optimizer = model::OptimizerKind::kSgd;
            } else {
              Bad("train.optimizer", v, "adam or sgd");
            }
          },
          [](const ExperimentConfig& c) {
            return std::string(c.train.optimizer == model::OptimizerKind::kAdam
                                   ? "adam"
                                   : "sgd");
          }},
      FILM_REAL_KEY("train.adam_beta1", train.adam_beta1),
      FILM_REAL_KEY("train.adam_beta2", train.adam_beta2),
      FILM_REAL_KEY("train.adam_epsilon", train.adam_epsilon),
      FILM_BOOL_KEY("train.freeze_embeddings", train.freeze_embeddings),
      FILM_SIZE_KEY("train.capture_every", capture_every),

      Key{"defense.kind",
          [](ExperimentConfig& c, const std::string& v) {
            c.defense.kind = fedsim::ParseDefenseKind(v);
          },
          [](const ExperimentConfig& c) {
            return fedsim::DefenseKindName(c.defense.kind);
          }},
      FILM_REAL_KEY("defense.prune_ratio", defense.prune_ratio),
      FILM_REAL_KEY("defense.clip_norm", defense.clip_norm),
      FILM_REAL_KEY("defense.noise_scale", defense.noise_scale),

      FILM_SIZE_KEY("beam.k", beam.beam_size),
      FILM_SIZE_KEY("beam.max_length", beam.max_length),
      FILM_SIZE_KEY("beam.ngram", beam.ngram),
      FILM_REAL_KEY("beam.penalty", beam.penalty),
      FILM_BOOL_KEY("beam.prompt_fallback", beam.prompt_fallback),
      FILM_BOOL_KEY("beam.oracle_caps", beam_oracle_caps),

      FILM_REAL_KEY("reorder.beta", reorder.beta),
      FILM_SIZE_KEY("reorder.steps", reorder.steps_per_stage),
      FILM_SIZE_KEY("reorder.cuts", reorder.cuts),
      FILM_SIZE_KEY("reorder.candidates", reorder.candidates_per_step),

      FILM_STRING_KEY("attack.transcript", transcript),
      Key{"attack.iterations",
          [](ExperimentConfig& c, const std::string& v) {
            c.attack_iterations = ParseList<std::size_t>("attack.iterations", v);
          },
          [](const ExperimentConfig& c) { return FormatList(c.attack_iterations); }},
      Key{"attack.batch_sizes",
          [](ExperimentConfig& c, const std::string& v) {
            c.attack_batch_sizes =
                ParseList<std::size_t>("attack.batch_sizes", v);
          },
          [](const ExperimentConfig& c) {
            return FormatList(c.attack_batch_sizes);
          }},
      FILM_SIZE_KEY("attack.probes", attack_probes),
      FILM_SIZE_KEY("attack.repetitions", repetitions),
      FILM_SIZE_KEY("attack.ban_order", ban_order),
      FILM_REAL_KEY("attack.match_threshold", match_threshold),
      FILM_STRING_KEY("attack.extraction", extraction),
      FILM_REAL_KEY("attack.tau", tau),
      FILM_BOOL_KEY("attack.score_runner_ups", score_runner_ups),

      FILM_STRING_KEY("sweep.axis", sweep_axis),
      Key{"sweep.values",
          [](ExperimentConfig& c, const std::string& v) {
            c.sweep_values = ParseList<double>("sweep.values", v);
          },
          [](const ExperimentConfig& c) { return FormatList(c.sweep_values); }},
      FILM_SIZE_KEY("sweep.probes", sweep_probes),
      FILM_SIZE_KEY("sweep.batch_size", sweep_batch_size),
      Key{"sweep.iteration",
          [](ExperimentConfig& c, const std::string& v) {
            c.sweep_iteration = ParseNumber<std::int64_t>("sweep.iteration", v);
          },
          [](const ExperimentConfig& c) {
            return std::to_string(c.sweep_iteration);
          }},

      FILM_STRING_KEY("metrics.results", metrics_results),
  };
  return keys;
}

#undef FILM_SIZE_KEY
#undef FILM_REAL_KEY
#undef FILM_BOOL_KEY
#undef FILM_STRING_KEY

}  // namespace

void ExperimentConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kConfigError, msg);
  };
  if (jobs < 1) fail("jobs must be >= 1");
  if (corpus_vocab_size < 4) fail("corpus.vocab_size must be >= 4");
  if (capture_every < 1) fail("train.capture_every must be >= 1");
  if (attack_probes < 1) fail("attack.probes must be >= 1");
  if (repetitions < 1) fail("attack.repetitions must be >= 1");
  if (ban_order < 1) fail("attack.ban_order must be >= 1");
  if (sweep_probes < 1) fail("sweep.probes must be >= 1");
  if (sweep_batch_size < 1) fail("sweep.batch_size must be >= 1");
  if (extraction != "auto" && extraction != "exact" && extraction != "threshold") {
    fail("attack.extraction must be auto, exact or threshold");
  }
  for (std::size_t b : attack_batch_sizes) {
    if (b < 1) fail("attack.batch_sizes entries must be >= 1");
  }
  try {
    model::Hyperparams h = hyper;
    h.vocab_size = std::max<std::size_t>(h.vocab_size, 4);
    h.Validate();
    train.Validate();
    defense.Validate();
    beam.Validate();
    reorder.Validate();
  } catch (const Error& e) {
    fail(e.detail());
  }
}

ExperimentConfig ParseConfig(std::string_view text, const std::string& origin) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    const std::string line = Trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError, where + ": expected key = value");
    }
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    const std::string value = Trim(std::string_view(line).substr(eq + 1));
    const auto& keys = Keys();
    auto it = std::find_if(keys.begin(), keys.end(),
                           [&](const Key& k) { return key == k.name; });
    if (it == keys.end()) {
      throw Error(ErrorCode::kConfigError, where + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::kConfigError, where + ": duplicate key '" + key + "'");
    }
    try {
      it->set(config, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfigError, where + ": " + e.detail());
    }
  }
  try {
    config.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, origin + ": " + e.detail());
  }
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kConfigError, "config file not found: " + path.string());
  }
  return ParseConfig(ReadFile(path), path.string());
}

std::string ConfigToText(const ExperimentConfig& config) {
  std::string out;
  for (const auto& k : Keys()) {
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += "\n";
  }
  return out;
}

}  // namespace film::cli
