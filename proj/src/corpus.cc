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

#include "film/corpus.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <utility>

#include "film/error.h"

namespace film::corpus {
namespace {

bool IsSpace(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

Vocab Vocab::FromTokens(std::vector<std::string> tokens) {
  if (tokens.size() < kNumSpecials + 1) {
    throw Error(ErrorCode::kInvalidInput, "vocabulary needs at least 4 tokens");
  }
  if (tokens[kPadId] != kPadToken || tokens[kUnkId] != kUnkToken ||
      tokens[kBosId] != kBosToken) {
    throw Error(ErrorCode::kInvalidInput,
                "vocabulary must start with <pad>, <unk>, <bos>");
  }
  Vocab vocab;
  vocab.index_.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].empty()) {
      throw Error(ErrorCode::kInvalidInput, "empty vocabulary token");
    }
    auto [it, inserted] =
        vocab.index_.emplace(tokens[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw Error(ErrorCode::kInvalidInput,
                  "duplicate vocabulary token '" + tokens[i] + "'");
    }
  }
  vocab.tokens_ = std::move(tokens);
  return vocab;
}

Vocab Vocab::Load(const std::filesystem::path& path) {
  return FromTokens(ReadLines(path));
}

void Vocab::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

bool Vocab::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

TokenId Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

Batch::Batch(std::vector<Sentence> members) : members_(std::move(members)) {
  if (members_.empty()) {
    throw Error(ErrorCode::kInvalidInput, "batch must hold at least one row");
  }
  for (const auto& s : members_) {
    if (s.token_ids.empty()) {
      throw Error(ErrorCode::kInvalidInput, "batch row is empty");
    }
    lengths_.push_back(s.token_ids.size());
    width_ = std::max(width_, s.token_ids.size());
  }
  ids_.assign(members_.size() * width_, kPadId);
  for (std::size_t r = 0; r < members_.size(); ++r) {
    std::copy(members_[r].token_ids.begin(), members_[r].token_ids.end(),
              ids_.begin() + static_cast<std::ptrdiff_t>(r * width_));
  }
}

std::span<const TokenId> Batch::row(std::size_t r) const {
  return std::span<const TokenId>(ids_).subspan(r * width_, width_);
}

std::span<const TokenId> Batch::tokens(std::size_t r) const {
  return row(r).first(lengths_[r]);
}

bool IsPunctuation(char c) {
  return c == '.' || c == ',' || c == '?' || c == '!';
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::exchange(current, {}));
  };
  for (char c : text) {
    if (IsSpace(c)) {
      flush();
    } else if (IsPunctuation(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

Vocab BuildVocab(std::span<const std::string> lines, std::size_t max_size) {
  if (max_size < kNumSpecials + 1) {
    throw Error(ErrorCode::kInvalidInput, "max_size must be at least 4");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& line : lines) {
    for (auto& w : SplitWords(line)) ++counts[std::move(w)];
  }
  for (auto special : {kPadToken, kUnkToken, kBosToken}) {
    counts.erase(std::string(special));
  }
  if (counts.empty()) {
    throw Error(ErrorCode::kInvalidCorpus, "corpus has no tokens");
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  // std::map iteration is already lexicographic, so a stable sort on count
  // leaves ties in lexicographic order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  std::vector<std::string> tokens{std::string(kPadToken),
                                  std::string(kUnkToken),
                                  std::string(kBosToken)};
  for (auto& [tok, _] : ranked) {
    if (tokens.size() >= max_size) break;
    tokens.push_back(std::move(tok));
  }
  return Vocab::FromTokens(std::move(tokens));
}

Sentence Tokenize(std::string_view text, const Vocab& vocab) {
  auto words = SplitWords(text);
  if (words.empty()) {
    throw Error(ErrorCode::kInvalidInput, "cannot tokenize empty text");
  }
  if (words.size() > kMaxSentenceTokens) {
    throw Error(ErrorCode::kSentenceTooLong,
                std::to_string(words.size()) + " tokens exceeds the cap of " +
                    std::to_string(kMaxSentenceTokens));
  }
  Sentence s;
  s.raw_text = std::string(text);
  s.token_ids.reserve(words.size());
  for (const auto& w : words) s.token_ids.push_back(vocab.id(w));
  return s;
}

std::string Detokenize(std::span<const TokenId> ids, const Vocab& vocab) {
  std::string out;
  for (TokenId id : ids) {
    const auto& tok = vocab.token(id);
    bool attach = tok.size() == 1 && IsPunctuation(tok[0]);
    if (!out.empty() && !attach) out.push_back(' ');
    out += tok;
  }
  return out;
}

std::string CanonicalText(std::string_view text) {
  std::string out;
  for (const auto& w : SplitWords(text)) {
    bool attach = w.size() == 1 && IsPunctuation(w[0]);
    if (!out.empty() && !attach) out.push_back(' ');
    out += w;
  }
  return out;
}

std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<EntitySpan> ParseEntityLine(std::string_view line) {
  std::vector<EntitySpan> spans;
  for (const auto& field : SplitWords(line)) {
    auto colon = field.find(':');
    EntitySpan span;
    const char* begin = field.data();
    const char* end = field.data() + field.size();
    bool ok = colon != std::string::npos;
    if (ok) {
      auto r1 = std::from_chars(begin, begin + colon, span.start);
      auto r2 = std::from_chars(begin + colon + 1, end, span.end);
      ok = r1.ec == std::errc() && r1.ptr == begin + colon &&
           r2.ec == std::errc() && r2.ptr == end && span.start < span.end;
    }
    if (!ok) {
      throw Error(ErrorCode::kInvalidCorpus,
                  "malformed entity span '" + field + "'");
    }
    spans.push_back(span);
  }
  return spans;
}

Corpus LoadCorpus(const std::filesystem::path& path, const Vocab& vocab,
                  Split split) {
  auto lines = ReadLines(path);
  auto ents_path = std::filesystem::path(path).replace_extension(".ents");
  std::vector<std::string> ents;
  if (std::filesystem::exists(ents_path)) {
    ents = ReadLines(ents_path);
    if (ents.size() != lines.size()) {
      throw Error(ErrorCode::kInvalidCorpus,
                  ents_path.string() + " has " + std::to_string(ents.size()) +
                      " lines, corpus has " + std::to_string(lines.size()));
    }
  }
  Corpus corpus;
  corpus.name = path.stem().string();
  corpus.split = split;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto words = SplitWords(lines[i]);
    if (words.empty() || words.size() > kMaxSentenceTokens) continue;
    Sentence s = Tokenize(lines[i], vocab);
    if (!ents.empty()) {
      s.entity_spans = ParseEntityLine(ents[i]);
      for (const auto& span : s.entity_spans) {
        if (span.end > s.token_ids.size()) {
          throw Error(ErrorCode::kInvalidCorpus,
                      "entity span beyond sentence end on line " +
                          std::to_string(i + 1));
        }
      }
    }
    corpus.sentences.push_back(std::move(s));
  }
  if (corpus.sentences.empty()) {
    throw Error(ErrorCode::kInvalidCorpus, path.string() + " has no sentences");
  }
  return corpus;
}

Batch SampleBatch(const Corpus& corpus, std::size_t b, Rng& rng) {
  if (b == 0) throw Error(ErrorCode::kInvalidInput, "batch size must be >= 1");
  if (b > corpus.size()) {
    throw Error(ErrorCode::kBatchTooLarge,
                "batch of " + std::to_string(b) + " from a corpus of " +
                    std::to_string(corpus.size()));
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first b slots are a uniform sample.
  for (std::size_t i = 0; i < b; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<Sentence> members;
  members.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    members.push_back(corpus.sentences[order[i]]);
  }
  return Batch(std::move(members));
}

}  // namespace film::corpus
