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

#include "vlnprep/noising.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "vlnprep/error.h"
#include "vlnprep/parallel.h"
#include "vlnprep/rng.h"

namespace vlnprep {
namespace {

std::vector<std::size_t> Iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void ShuffleWords(std::vector<Sentence>& sentences, Rng& rng) {
  for (auto& sentence : sentences) {
    std::size_t end = sentence.size();
    if (end > 0 && IsPunctuation(sentence.back())) --end;
    rng.Shuffle(std::span<std::string>(sentence.data(), end));
  }
}

void ShuffleSentences(std::vector<Sentence>& sentences, Rng& rng) {
  const bool all_same =
      std::adjacent_find(sentences.begin(), sentences.end(),
                         std::not_equal_to<>()) == sentences.end();
  if (sentences.size() < 2 || all_same) return;
  std::vector<std::size_t> order = Iota(sentences.size());
  std::vector<Sentence> candidate;
  do {
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(std::span<std::size_t>(order));
    candidate.clear();
    for (std::size_t idx : order) candidate.push_back(sentences[idx]);
  } while (candidate == sentences);
  sentences = std::move(candidate);
}

std::vector<Sentence> ShuffleAll(const std::vector<Sentence>& sentences,
                                 Rng& rng) {
  Sentence words;
  bool any = false;
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence) {
      any = true;
      if (!IsPunctuation(token)) words.push_back(token);
    }
  }
  if (!any) return {};
  rng.Shuffle(std::span<std::string>(words));
  words.push_back(".");
  return {std::move(words)};
}

std::size_t RoundHalfUp(double value) {
  return static_cast<std::size_t>(std::floor(value + 0.5));
}

}  // namespace

ShuffleMode ParseShuffleMode(std::string_view name) {
  if (name == "sf-word") return ShuffleMode::kWord;
  if (name == "sf-sent") return ShuffleMode::kSentence;
  if (name == "sf-word-sent") return ShuffleMode::kWordSentence;
  if (name == "sf-all") return ShuffleMode::kAll;
  throw UsageError("unknown shuffle mode '" + std::string(name) + "'");
}

std::string_view ShuffleModeName(ShuffleMode mode) {
  switch (mode) {
    case ShuffleMode::kWord: return "sf-word";
    case ShuffleMode::kSentence: return "sf-sent";
    case ShuffleMode::kWordSentence: return "sf-word-sent";
    case ShuffleMode::kAll: return "sf-all";
  }
  return "";
}

MismatchMode ParseMismatchMode(std::string_view name) {
  if (name == "block") return MismatchMode::kBlock;
  if (name == "random") return MismatchMode::kRandom;
  throw UsageError("unknown mismatch mode '" + std::string(name) + "'");
}

std::string_view MismatchModeName(MismatchMode mode) {
  return mode == MismatchMode::kBlock ? "block" : "random";
}

TokenizedInstruction ShuffleInstruction(const TokenizedInstruction& tokenized,
                                        ShuffleMode mode, uint64_t seed) {
  TokenizedInstruction out = tokenized;
  switch (mode) {
    case ShuffleMode::kWord: {
      Rng rng(seed);
      ShuffleWords(out.sentences, rng);
      break;
    }
    case ShuffleMode::kSentence: {
      Rng rng(seed);
      ShuffleSentences(out.sentences, rng);
      break;
    }
    case ShuffleMode::kWordSentence: {
      Rng words(DeriveSeed(seed, 1));
      ShuffleWords(out.sentences, words);
      Rng order(DeriveSeed(seed, 2));
      ShuffleSentences(out.sentences, order);
      break;
    }
    case ShuffleMode::kAll: {
      Rng rng(seed);
      out.sentences = ShuffleAll(tokenized.sentences, rng);
      break;
    }
  }
  return out;
}

Dataset ShuffleDataset(const Dataset& dataset, ShuffleMode mode,
                       uint64_t seed) {
  Dataset out = dataset;
  ParallelFor(out.samples.size(), [&](std::size_t i) {
    Sample& sample = out.samples[i];
    for (std::size_t j = 0; j < sample.instructions.size(); ++j) {
      Instruction& ins = sample.instructions[j];
      const TokenizedInstruction original = Tokenize(ins.text, ins.language);
      const TokenizedInstruction shuffled =
          ShuffleInstruction(original, mode, DeriveSeed(seed, sample.path_id, j));
      if (shuffled != original) ins.text = Detokenize(shuffled);
    }
  });
  out.RecordTransform("noise", {{"mode", ShuffleModeName(mode)}, {"seed", seed}});
  return out;
}

Dataset Mismatch(const Dataset& dataset, MismatchMode mode, uint64_t seed) {
  const std::size_t n = dataset.samples.size();
  Dataset out = dataset;
  Rng rng(seed);

  if (mode == MismatchMode::kBlock) {
    if (n < 2) {
      throw ValidationError("mismatch block needs at least 2 samples, got " +
                            std::to_string(n));
    }
    // Rejection sampling of uniform permutations yields a uniform
    // derangement; about e draws on average.
    std::vector<std::size_t> donor = Iota(n);
    auto has_fixed_point = [&] {
      for (std::size_t i = 0; i < n; ++i) {
        if (donor[i] == i) return true;
      }
      return false;
    };
    do {
      std::iota(donor.begin(), donor.end(), 0);
      rng.Shuffle(std::span<std::size_t>(donor));
    } while (has_fixed_point());
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i].instructions = dataset.samples[donor[i]].instructions;
    }
  } else {
    std::vector<Instruction> pool;
    for (const auto& s : dataset.samples) {
      pool.insert(pool.end(), s.instructions.begin(), s.instructions.end());
    }
    rng.Shuffle(std::span<Instruction>(pool));
    std::size_t next = 0;
    for (auto& s : out.samples) {
      for (auto& ins : s.instructions) ins = pool[next++];
    }
  }
  out.RecordTransform("mismatch",
                      {{"mode", MismatchModeName(mode)}, {"seed", seed}});
  return out;
}

Dataset EmptyLanguage(const Dataset& dataset, double keep_fraction,
                      uint64_t seed) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0)) {
    throw ValidationError("empty-lang keep fraction must be in [0, 1]");
  }
  const std::size_t n = dataset.samples.size();
  const std::size_t keep =
      std::min(n, RoundHalfUp(keep_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order = Iota(n);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dataset.samples[a].path_id < dataset.samples[b].path_id;
  });
  Rng rng(seed);
  rng.Shuffle(std::span<std::size_t>(order));

  Dataset out = dataset;
  for (std::size_t r = keep; r < n; ++r) {
    for (auto& ins : out.samples[order[r]].instructions) ins.text.clear();
  }
  out.RecordTransform("empty-lang",
                      {{"keep", keep_fraction}, {"kept", keep}, {"seed", seed}});
  return out;
}

}  // namespace vlnprep
