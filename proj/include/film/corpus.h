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

// Word-level corpora: vocabulary, tokenization, padded batches.

#ifndef FILM_CORPUS_H_
#define FILM_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace film {

using Rng = std::mt19937_64;

namespace corpus {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kBosId = 2;
inline constexpr std::size_t kNumSpecials = 3;
inline constexpr std::size_t kMaxSentenceTokens = 40;
inline constexpr std::size_t kDefaultVocabSize = 8192;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<bos>";

class Vocab {
 public:
  // `tokens` must start with the three specials and contain no duplicates.
  static Vocab FromTokens(std::vector<std::string> tokens);
  static Vocab Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  // Unknown strings map to kUnkId.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// [start, end) token indices into Sentence::token_ids.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const EntitySpan&) const = default;
};

struct Sentence {
  std::vector<TokenId> token_ids;
  std::string raw_text;
  std::vector<EntitySpan> entity_spans;
};

enum class Split { kTrain, kEval };

struct Corpus {
  std::string name;
  Split split = Split::kTrain;
  std::vector<Sentence> sentences;

  std::size_t size() const { return sentences.size(); }
};

// b x width matrix of token ids, right-padded with kPadId.
class Batch {
 public:
  explicit Batch(std::vector<Sentence> members);

  std::size_t size() const { return lengths_.size(); }
  std::size_t width() const { return width_; }
  std::size_t length(std::size_t r) const { return lengths_[r]; }
  const std::vector<std::size_t>& lengths() const { return lengths_; }
  std::span<const TokenId> row(std::size_t r) const;
  // Row r without its padding.
  std::span<const TokenId> tokens(std::size_t r) const;
  const std::vector<Sentence>& members() const { return members_; }

 private:
  std::vector<Sentence> members_;
  std::vector<std::size_t> lengths_;
  std::vector<TokenId> ids_;
  std::size_t width_ = 0;
};

bool IsPunctuation(char c);
// Whitespace split with `. , ? !` detached as standalone tokens.
std::vector<std::string> SplitWords(std::string_view text);

Vocab BuildVocab(std::span<const std::string> lines,
                 std::size_t max_size = kDefaultVocabSize);
Sentence Tokenize(std::string_view text, const Vocab& vocab);
std::string Detokenize(std::span<const TokenId> ids, const Vocab& vocab);
// Trimmed, single-spaced form with punctuation attached to the preceding word.
std::string CanonicalText(std::string_view text);

std::vector<std::string> ReadLines(const std::filesystem::path& path);
// Parses one sidecar line of `start:end` pairs.
std::vector<EntitySpan> ParseEntityLine(std::string_view line);
// Loads one sentence per non-empty line, dropping lines longer than
// kMaxSentenceTokens. Entity spans come from `<path minus ext>.ents` when
// that file exists.
Corpus LoadCorpus(const std::filesystem::path& path, const Vocab& vocab,
                  Split split = Split::kTrain);

Batch SampleBatch(const Corpus& corpus, std::size_t b, Rng& rng);

}  // namespace corpus
}  // namespace film

#endif  // FILM_CORPUS_H_
