//
// Copyright 2026 The vlnprep Authors
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
//

#ifndef VLNPREP_CORPUS_H_
#define VLNPREP_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vlnprep {

enum class Language { kEnUs, kEnIn, kHi, kTe };

// "en-us", "en-in", "hi", "te". Throws ValidationError on anything else.
Language ParseLanguage(std::string_view tag);
std::string_view LanguageTag(Language language);

// Sentence separator: "|" for Hindi, "." otherwise.
std::string_view SentenceSeparator(Language language);

struct Instruction {
  std::string text;
  Language language = Language::kEnUs;
  // Optional provenance tag ("uo", "mismatch"); empty when untagged.
  std::string source;

  bool operator==(const Instruction&) const = default;
};

struct Sample {
  std::string path_id;
  std::string scan;
  std::vector<std::string> path;
  std::vector<Instruction> instructions;

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::vector<Sample> samples;
  // Free-form object: "transforms" history array and the producing run's
  // "manifest".
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  bool operator==(const Dataset&) const = default;

  // Appends {"op": op, ...params} to metadata["transforms"].
  void RecordTransform(std::string_view op, nlohmann::ordered_json params);
};

using Sentence = std::vector<std::string>;

struct TokenizedInstruction {
  std::vector<Sentence> sentences;
  std::string separator = ".";

  bool operator==(const TokenizedInstruction&) const = default;

  std::size_t TokenCount() const;
};

// True for a token made only of terminal punctuation characters
// (. | ! ? ,).
bool IsPunctuation(std::string_view token);

// Whole-word tokens: maximal non-whitespace runs, with trailing terminal
// punctuation split off one character per token. A sentence ends after each
// separator token; an empty trailing sentence is dropped.
TokenizedInstruction Tokenize(std::string_view text, Language language);

// Joins every token with a single space.
std::string Detokenize(const TokenizedInstruction& tokenized);

// Number of non-punctuation tokens.
std::size_t WordCount(const TokenizedInstruction& tokenized);

// Unicode NFC normalization of UTF-8 text.
std::string NormalizeNfc(std::string_view text);

// Dataset files are either a bare JSON array of samples, or an envelope
// {"metadata": {...}, "samples": [...]}. Instructions may be plain strings
// (promoted to en-us) or {"text", "language"[, "source"]} objects.
Dataset ParseDataset(const nlohmann::ordered_json& document);
Dataset LoadDataset(const std::filesystem::path& path);

// Object form, NFC text. Bare array when metadata is empty, envelope
// otherwise.
nlohmann::ordered_json DatasetToJson(const Dataset& dataset);
void SaveDataset(const Dataset& dataset, const std::filesystem::path& path);

// Uniform subset of n samples without replacement, original order kept.
// Selection is the n-prefix of a forward partial Fisher-Yates over sample
// indices. Throws ValidationError when n > |samples|.
Dataset Subsample(const Dataset& dataset, std::size_t n, uint64_t seed);

// Shared by the writers of every JSON output: two-space indent, trailing
// newline.
void WriteJsonFile(const nlohmann::ordered_json& document,
                   const std::filesystem::path& path);
nlohmann::ordered_json ReadJsonFile(const std::filesystem::path& path);
std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace vlnprep

#endif  // VLNPREP_CORPUS_H_
