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

#ifndef VLNPREP_METRICS_H_
#define VLNPREP_METRICS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vlnprep/corpus.h"
#include "vlnprep/envgraph.h"

namespace vlnprep {

inline constexpr double kDefaultSuccessThreshold = 3.0;
inline constexpr std::size_t kDefaultLengthBinWidth = 10;

struct Episode {
  std::string instruction_id;
  std::string scan;
  std::vector<std::string> predicted_path;
  std::vector<std::string> reference_path;
};

// All metric functions validate the paths against the graph (reference
// length >= 2, predicted length >= 1) and throw ValidationError on failure.
// A cache may be shared across calls and threads; null computes fresh rows.

// 1 iff the geodesic distance between the final predicted and final
// reference nodes is <= threshold.
int Success(const EnvironmentGraph& graph, const Episode& episode,
            double threshold, GeodesicCache* cache = nullptr);

// success * d / max(d, p), where d is the geodesic start-to-goal distance of
// the reference and p the predicted path length. Requires a shared start and
// d > 0.
double Spl(const EnvironmentGraph& graph, const Episode& episode,
           double threshold, GeodesicCache* cache = nullptr);

// Full-lattice DTW between the two node sequences with geodesic point cost.
double DtwDistance(const EnvironmentGraph& graph,
                   const std::vector<std::string>& predicted,
                   const std::vector<std::string>& reference,
                   GeodesicCache* cache = nullptr);

// exp(-DTW / (|reference| * threshold)).
double Ndtw(const EnvironmentGraph& graph, const Episode& episode,
            double threshold, GeodesicCache* cache = nullptr);

struct EpisodeResult {
  std::string instruction_id;
  std::string scan;
  int success = 0;
  double spl = 0.0;
  double ndtw = 0.0;
  std::size_t instruction_words = 0;
  std::size_t reference_steps = 0;  // |reference_path| - 1
};

// One cell of the instruction-length x reference-steps grid.
struct BreakdownCell {
  std::size_t length_bin_lo = 0;  // inclusive word count
  std::size_t length_bin_hi = 0;  // exclusive
  std::size_t steps = 0;
  std::size_t count = 0;
  std::size_t successes = 0;
  double sr = 0.0;  // x100
};

struct EvalReport {
  double threshold = kDefaultSuccessThreshold;
  std::size_t bin_width = kDefaultLengthBinWidth;
  std::vector<EpisodeResult> episodes;  // sorted by instruction_id
  double sr = 0.0;    // mean x100
  double spl = 0.0;   // mean x100
  double ndtw = 0.0;  // mean x100
  std::vector<BreakdownCell> breakdown;  // empty without a dataset
};

// Evaluates every episode (in parallel) and folds aggregates in
// instruction_id order. With a dataset, instruction_id "<path_id>_<index>"
// selects the instruction whose word count bins the episode; a lookup miss
// is an error. Errors carry the instruction_id.
EvalReport Evaluate(const std::map<std::string, EnvironmentGraph>& graphs,
                    const std::vector<Episode>& episodes,
                    const Dataset* dataset,
                    double threshold = kDefaultSuccessThreshold,
                    std::size_t bin_width = kDefaultLengthBinWidth);

// Success-rate agreement: fraction of instruction ids on which the two
// success bits coincide. Throws ValidationError listing the symmetric
// difference when the id sets differ, or when both are empty.
double Sra(const EvalReport& x, const EvalReport& y);

struct DeltaCell {
  std::size_t length_bin_lo = 0;
  std::size_t length_bin_hi = 0;
  std::size_t steps = 0;
  std::optional<double> delta_sr;  // a - b; empty when a side lacks the cell
  std::size_t count_a = 0;
  std::size_t count_b = 0;
};

// Cell-wise SR(a) - SR(b) over the union of cells. Throws when bin widths
// differ.
std::vector<DeltaCell> DeltaSr(const EvalReport& a, const EvalReport& b);

std::vector<Episode> ParseEpisodes(const nlohmann::ordered_json& document);
std::vector<Episode> LoadEpisodes(const std::filesystem::path& path);

// Aggregates are rounded to one decimal in the JSON form; per-episode values
// keep full precision.
nlohmann::ordered_json ReportToJson(const EvalReport& report);
EvalReport ReportFromJson(const nlohmann::ordered_json& document);
std::string ReportToCsv(const EvalReport& report);
nlohmann::ordered_json DeltaToJson(const std::vector<DeltaCell>& cells);

}  // namespace vlnprep

#endif  // VLNPREP_METRICS_H_
