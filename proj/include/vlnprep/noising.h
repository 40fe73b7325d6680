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

#ifndef VLNPREP_NOISING_H_
#define VLNPREP_NOISING_H_

#include <cstdint>
#include <string_view>

#include "vlnprep/corpus.h"

namespace vlnprep {

enum class ShuffleMode {
  kWord,      // words within each sentence, sentence order kept
  kSentence,  // sentence order, never the original order
  kWordSentence,
  kAll,  // punctuation dropped, everything shuffled, one final "."
};

enum class MismatchMode {
  kBlock,   // whole instruction blocks move along a derangement
  kRandom,  // instructions pooled and re-dealt, per-sample counts kept
};

// "sf-word", "sf-sent", "sf-word-sent", "sf-all".
ShuffleMode ParseShuffleMode(std::string_view name);
std::string_view ShuffleModeName(ShuffleMode mode);
// "block", "random".
MismatchMode ParseMismatchMode(std::string_view name);
std::string_view MismatchModeName(MismatchMode mode);

// Deterministic in (tokenized, mode, seed).
//
// kWord keeps a sentence-final punctuation token in place and shuffles the
// rest of the sentence. kSentence draws uniform permutations until the
// sentence sequence differs from the original; a single sentence, or a run
// of identical sentences, is returned unchanged. kWordSentence applies kWord
// then kSentence with child seeds 1 and 2. kAll returns zero sentences for
// empty input.
TokenizedInstruction ShuffleInstruction(const TokenizedInstruction& tokenized,
                                        ShuffleMode mode, uint64_t seed);

// Shuffles every instruction with seed DeriveSeed(seed, path_id, index).
// Instructions the shuffle leaves unchanged keep their original text byte for
// byte; changed ones are re-detokenized.
Dataset ShuffleDataset(const Dataset& dataset, ShuffleMode mode,
                       uint64_t seed);

// Reassigns instructions across samples. Paths and path ids are untouched.
// kBlock throws ValidationError on fewer than 2 samples.
Dataset Mismatch(const Dataset& dataset, MismatchMode mode, uint64_t seed);

// Keeps the text of round-half-up(keep_fraction * N) samples, chosen by a
// seeded Fisher-Yates over samples ordered by path_id. Every instruction of
// the other samples becomes "". Instruction counts are preserved.
Dataset EmptyLanguage(const Dataset& dataset, double keep_fraction,
                      uint64_t seed);

}  // namespace vlnprep

#endif  // VLNPREP_NOISING_H_
