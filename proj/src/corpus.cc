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

#include "vlnprep/corpus.h"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "vlnprep/error.h"
#include "vlnprep/rng.h"

namespace vlnprep {
namespace {

using nlohmann::ordered_json;
using json = nlohmann::ordered_json;

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsPunctuationChar(char c) {
  return c == '.' || c == '|' || c == '!' || c == '?' || c == ',';
}

[[noreturn]] void RecordError(const std::string& path_id,
                              const std::string& field,
                              const std::string& problem) {
  throw ValidationError("sample '" + path_id + "': field '" + field + "' " +
                        problem);
}

Instruction ParseInstruction(const json& node, const std::string& path_id,
                             std::size_t index) {
  const std::string field = "instructions[" + std::to_string(index) + "]";
  if (node.is_string()) {
    return Instruction{node.get<std::string>(), Language::kEnUs, ""};
  }
  if (!node.is_object()) RecordError(path_id, field, "must be string or object");
  Instruction out;
  auto text = node.find("text");
  if (text == node.end() || !text->is_string()) {
    RecordError(path_id, field + ".text", "missing or not a string");
  }
  out.text = text->get<std::string>();
  if (auto lang = node.find("language"); lang != node.end()) {
    if (!lang->is_string()) {
      RecordError(path_id, field + ".language", "not a string");
    }
    try {
      out.language = ParseLanguage(lang->get<std::string>());
    } catch (const ValidationError& e) {
      RecordError(path_id, field + ".language", e.what());
    }
  }
  if (auto src = node.find("source"); src != node.end()) {
    if (!src->is_string()) RecordError(path_id, field + ".source", "not a string");
    out.source = src->get<std::string>();
  }
  return out;
}

Sample ParseSample(const json& node, std::size_t position) {
  if (!node.is_object()) {
    throw ValidationError("record #" + std::to_string(position) +
                          " is not an object");
  }
  Sample s;
  auto id = node.find("path_id");
  if (id == node.end()) {
    throw ValidationError("record #" + std::to_string(position) +
                          ": missing field 'path_id'");
  }
  // R2R ships integer path ids.
  if (id->is_string()) {
    s.path_id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    s.path_id = std::to_string(id->get<long long>());
  } else {
    throw ValidationError("record #" + std::to_string(position) +
                          ": field 'path_id' must be a string");
  }

  auto scan = node.find("scan");
  if (scan == node.end() || !scan->is_string()) {
    RecordError(s.path_id, "scan", "missing or not a string");
  }
  s.scan = scan->get<std::string>();

  auto path = node.find("path");
  if (path == node.end() || !path->is_array()) {
    RecordError(s.path_id, "path", "missing or not an array");
  }
  for (const auto& vp : *path) {
    if (!vp.is_string()) RecordError(s.path_id, "path", "has a non-string entry");
    s.path.push_back(vp.get<std::string>());
  }
  if (s.path.size() < 2) RecordError(s.path_id, "path", "has length < 2");

  auto instr = node.find("instructions");
  if (instr == node.end() || !instr->is_array()) {
    RecordError(s.path_id, "instructions", "missing or not an array");
  }
  for (std::size_t i = 0; i < instr->size(); ++i) {
    s.instructions.push_back(ParseInstruction((*instr)[i], s.path_id, i));
  }
  return s;
}

}  // namespace

Language ParseLanguage(std::string_view tag) {
  if (tag == "en-us" || tag == "en-US") return Language::kEnUs;
  if (tag == "en-in" || tag == "en-IN") return Language::kEnIn;
  if (tag == "hi" || tag == "hi-IN") return Language::kHi;
  if (tag == "te" || tag == "te-IN") return Language::kTe;
  throw ValidationError("unknown language tag '" + std::string(tag) + "'");
}

std::string_view LanguageTag(Language language) {
  switch (language) {
    case Language::kEnUs: return "en-us";
    case Language::kEnIn: return "en-in";
    case Language::kHi: return "hi";
    case Language::kTe: return "te";
  }
  return "en-us";
}

std::string_view SentenceSeparator(Language language) {
  return language == Language::kHi ? "|" : ".";
}

void Dataset::RecordTransform(std::string_view op, ordered_json params) {
  if (!metadata.is_object()) metadata = ordered_json::object();
  ordered_json entry = ordered_json::object();
  entry["op"] = op;
  for (auto& [key, value] : params.items()) entry[key] = value;
  metadata["transforms"].push_back(std::move(entry));
}

std::size_t TokenizedInstruction::TokenCount() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

bool IsPunctuation(std::string_view token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), IsPunctuationChar);
}

TokenizedInstruction Tokenize(std::string_view text, Language language) {
  TokenizedInstruction out;
  out.separator = std::string(SentenceSeparator(language));

  Sentence current;
  auto emit = [&](std::string token) {
    const bool ends_sentence = token == out.separator;
    current.push_back(std::move(token));
    if (ends_sentence) {
      out.sentences.push_back(std::move(current));
      current.clear();
    }
  };

  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    if (start == i) break;
    std::string_view run = text.substr(start, i - start);

    std::size_t word_end = run.size();
    while (word_end > 0 && IsPunctuationChar(run[word_end - 1])) --word_end;
    if (word_end > 0) emit(std::string(run.substr(0, word_end)));
    for (std::size_t p = word_end; p < run.size(); ++p) {
      emit(std::string(1, run[p]));
    }
  }
  if (!current.empty()) out.sentences.push_back(std::move(current));
  return out;
}

std::string Detokenize(const TokenizedInstruction& tokenized) {
  std::string out;
  for (const auto& sentence : tokenized.sentences) {
    for (const auto& token : sentence) {
      if (!out.empty()) out.push_back(' ');
      out += token;
    }
  }
  return out;
}

std::size_t WordCount(const TokenizedInstruction& tokenized) {
  std::size_t n = 0;
  for (const auto& s : tokenized.sentences) {
    n += std::count_if(s.begin(), s.end(),
                       [](const std::string& t) { return !IsPunctuation(t); });
  }
  return n;
}

std::string NormalizeNfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw ValidationError("ICU NFC normalizer unavailable");
  }
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (nfc->isNormalized(source, status) && U_SUCCESS(status)) {
    return std::string(text);
  }
  status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw ValidationError("NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

Dataset ParseDataset(const json& document) {
  Dataset d;
  const json* records = &document;
  if (document.is_object()) {
    auto samples = document.find("samples");
    if (samples == document.end()) {
      throw ValidationError("dataset object has no 'samples' array");
    }
    records = &*samples;
    if (auto meta = document.find("metadata"); meta != document.end()) {
      if (!meta->is_object()) {
        throw ValidationError("dataset 'metadata' must be an object");
      }
      d.metadata = *meta;
    }
  }
  if (!records->is_array()) {
    throw ValidationError("dataset must be a JSON array of samples");
  }

  std::unordered_set<std::string> seen;
  d.samples.reserve(records->size());
  for (std::size_t i = 0; i < records->size(); ++i) {
    Sample s = ParseSample((*records)[i], i);
    if (!seen.insert(s.path_id).second) {
      throw ValidationError("duplicate path_id '" + s.path_id + "'");
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

Dataset LoadDataset(const std::filesystem::path& path) {
  try {
    return ParseDataset(ReadJsonFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ordered_json DatasetToJson(const Dataset& dataset) {
  ordered_json samples = ordered_json::array();
  for (const auto& s : dataset.samples) {
    ordered_json record;
    record["path_id"] = s.path_id;
    record["scan"] = s.scan;
    record["path"] = s.path;
    ordered_json instructions = ordered_json::array();
    for (const auto& ins : s.instructions) {
      ordered_json item;
      item["text"] = NormalizeNfc(ins.text);
      item["language"] = LanguageTag(ins.language);
      if (!ins.source.empty()) item["source"] = ins.source;
      instructions.push_back(std::move(item));
    }
    record["instructions"] = std::move(instructions);
    samples.push_back(std::move(record));
  }
  if (dataset.metadata.is_object() && !dataset.metadata.empty()) {
    ordered_json envelope;
    envelope["metadata"] = dataset.metadata;
    envelope["samples"] = std::move(samples);
    return envelope;
  }
  return samples;
}

void SaveDataset(const Dataset& dataset, const std::filesystem::path& path) {
  WriteJsonFile(DatasetToJson(dataset), path);
}

Dataset Subsample(const Dataset& dataset, std::size_t n, uint64_t seed) {
  const std::size_t total = dataset.samples.size();
  if (n > total) {
    throw ValidationError("subsample: n=" + std::to_string(n) +
                          " exceeds dataset size " + std::to_string(total));
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.ShufflePrefix(std::span<std::size_t>(order), n);
  order.resize(n);
  std::sort(order.begin(), order.end());

  Dataset out;
  out.metadata = dataset.metadata;
  out.samples.reserve(n);
  for (std::size_t idx : order) out.samples.push_back(dataset.samples[idx]);
  out.RecordTransform("subsample", {{"n", n}, {"seed", seed}});
  return out;
}

void WriteJsonFile(const ordered_json& document,
                   const std::filesystem::path& path) {
  WriteFile(path, document.dump(2) + "\n");
}

ordered_json ReadJsonFile(const std::filesystem::path& path) {
  const std::string contents = ReadFile(path);
  try {
    return ordered_json::parse(contents);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

}  // namespace vlnprep
