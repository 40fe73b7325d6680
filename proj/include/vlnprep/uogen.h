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

#ifndef VLNPREP_UOGEN_H_
#define VLNPREP_UOGEN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vlnprep/corpus.h"
#include "vlnprep/rng.h"

namespace vlnprep {

// Filler-word frequencies. Object-label words are removed at training time
// and remembered in excluded().
class UnigramModel {
 public:
  UnigramModel() = default;
  // Throws ValidationError if a counted token is excluded or a count is 0.
  UnigramModel(std::map<std::string, uint64_t> counts,
               std::set<std::string> excluded);

  const std::map<std::string, uint64_t>& counts() const { return counts_; }
  const std::set<std::string>& excluded() const { return excluded_; }
  uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }

  // One draw: r = Uniform(total), first token in byte order whose cumulative
  // count exceeds r.
  const std::string& Sample(Rng& rng) const;

 private:
  std::map<std::string, uint64_t> counts_;
  std::set<std::string> excluded_;
  uint64_t total_ = 0;
  std::vector<std::string> tokens_;
  std::vector<uint64_t> cumulative_;
};

// Empirical instruction length histogram (word tokens).
class LengthDistribution {
 public:
  LengthDistribution() = default;
  // Throws ValidationError on a zero length or zero count.
  explicit LengthDistribution(std::map<std::size_t, uint64_t> histogram);

  const std::map<std::size_t, uint64_t>& histogram() const {
    return histogram_;
  }
  uint64_t total() const { return total_; }
  double Probability(std::size_t length) const;

  // Same draw rule as UnigramModel::Sample, over lengths ascending.
  std::size_t Sample(Rng& rng) const;

 private:
  std::map<std::size_t, uint64_t> histogram_;
  uint64_t total_ = 0;
};

struct Detection {
  std::string label;
  double score = 0.0;
};

// One entry per panorama, in trajectory order; each sorted by descending
// score.
using PanoramaDetections = std::vector<Detection>;
using TrajectoryDetections = std::vector<PanoramaDetections>;
using DetectionSet = std::map<std::string, TrajectoryDetections>;

struct UOConfig {
  std::size_t objects_per_window = 3;     // a
  std::size_t panoramas_per_window = 2;   // b
  std::size_t detections_per_panorama = 5;  // k
  bool shuffle_objects = false;
  bool no_detector = false;
};

// Throws ValidationError when a count is zero.
void ValidateConfig(const UOConfig& config);

// Counts non-punctuation tokens of every instruction. A token is excluded
// when its ASCII-lowercased form equals a label word (multi-word labels
// contribute each word). Throws ValidationError("empty unigram support") if
// nothing remains.
UnigramModel TrainUnigram(const Dataset& dataset,
                          const std::set<std::string>& object_labels);

// Histogram of per-instruction word counts over nonempty instructions.
// Throws ValidationError when there are none.
LengthDistribution FitLengthDistribution(const Dataset& dataset);

// Everything needed to check one generation against its invariants.
struct GenerationTrace {
  std::size_t target_length = 0;  // l
  std::size_t object_words = 0;   // W
  struct Window {
    std::vector<std::string> pool;       // labels, pool order
    std::vector<std::size_t> selected;  // ascending pool indices
    std::vector<std::string> fillers;
  };
  std::vector<Window> windows;
  TokenizedInstruction tokens;
};

// Unigram + Object generation for one trajectory. Draw order under
// Rng(seed): target length; per window, the partial Fisher-Yates selecting
// min(a, pool) pool indices; per window, its filler words; finally one
// Next() seeding the shuffle when shuffle_objects is set.
// detections may be null when config.no_detector is set.
GenerationTrace TraceGeneration(const Sample& sample,
                                const TrajectoryDetections* detections,
                                const UnigramModel& unigram,
                                const LengthDistribution& lengths,
                                const UOConfig& config, uint64_t seed);

Instruction GenerateInstruction(const Sample& sample,
                                const TrajectoryDetections* detections,
                                const UnigramModel& unigram,
                                const LengthDistribution& lengths,
                                const UOConfig& config, uint64_t seed);

// Replaces every sample's instructions with per_traj generated ones (seed
// DeriveSeed(seed, path_id, j), tagged source "uo"). With a donor, per_traj
// more instructions per sample are dealt from the donor's pooled
// instructions after a seeded shuffle (tagged source "mismatch"); the pool is
// reshuffled and reused when exhausted.
Dataset AnnotateDataset(const Dataset& dataset, const DetectionSet& detections,
                        const UnigramModel& unigram,
                        const LengthDistribution& lengths,
                        const UOConfig& config, std::size_t per_traj,
                        uint64_t seed, const Dataset* mismatch_donor = nullptr);

DetectionSet ParseDetections(const nlohmann::ordered_json& document);
DetectionSet LoadDetections(const std::filesystem::path& path);

// Labels file: JSON array of strings, or plain text with one label per line.
std::set<std::string> LoadLabels(const std::filesystem::path& path);

// {"format", "unigram": {"counts", "total", "excluded"},
//  "lengths": {"histogram"}}.
nlohmann::ordered_json ModelToJson(const UnigramModel& unigram,
                                   const LengthDistribution& lengths);
void ModelFromJson(const nlohmann::ordered_json& document,
                   UnigramModel& unigram, LengthDistribution& lengths);

}  // namespace vlnprep

#endif  // VLNPREP_UOGEN_H_
