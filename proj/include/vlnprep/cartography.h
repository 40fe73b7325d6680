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

#ifndef VLNPREP_CARTOGRAPHY_H_
#define VLNPREP_CARTOGRAPHY_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace vlnprep {

// One epoch of a sample: either per-step probabilities of the correct action
// or an already multiplied trajectory probability.
using EpochRecord = std::variant<std::vector<double>, double>;

// sample_id -> records for epochs 1..E. Every sample has the same E.
using DynamicsLog = std::map<std::string, std::vector<EpochRecord>>;

enum class Region { kEasy, kAmbiguous, kHard };

std::string_view RegionName(Region region);  // "easy", "ambiguous", "hard"
Region ParseRegion(std::string_view name);

struct CartographyPoint {
  std::string sample_id;
  double confidence = 0.0;   // mean over epochs
  double variability = 0.0;  // population standard deviation over epochs
  std::optional<Region> region;
};

enum class SelectionPolicy { kRandom, kCutAmbiguous, kTopAmbiguous, kTopConfidence };

// "random", "cut_amb", "top_amb", "top_conf".
SelectionPolicy ParseSelectionPolicy(std::string_view name);
std::string_view SelectionPolicyName(SelectionPolicy policy);

// Product of the per-step probabilities. Throws ValidationError on an empty
// list or a value outside [0, 1].
double TrajectoryProbability(std::span<const double> step_probs);

// Confidence and variability per sample, in sample_id order. Throws when E
// differs across samples or is 0, or on out-of-range probabilities.
std::vector<CartographyPoint> ComputeMap(const DynamicsLog& log);

// Linear-interpolation quantile of the variabilities; q in [0, 1].
double VariabilityQuantile(std::span<const CartographyPoint> points, double q);

// AMBIGUOUS when variability is strictly above the sigma_split quantile;
// otherwise EASY when confidence >= mu_threshold, else HARD.
std::vector<CartographyPoint> ClassifyRegions(
    std::vector<CartographyPoint> points, double mu_threshold = 0.5,
    double sigma_split = 0.5);

// Selected sample ids, sorted. Sizes use round-half-up(fraction * N). Ranking
// sorts are stable with sample_id as the tiebreak. RANDOM is the count-prefix
// of a forward partial Fisher-Yates over ids in sorted order.
std::vector<std::string> SelectSubset(std::span<const CartographyPoint> points,
                                      SelectionPolicy policy, double fraction,
                                      uint64_t seed);

DynamicsLog ParseDynamics(const nlohmann::ordered_json& document);
DynamicsLog LoadDynamics(const std::filesystem::path& path);

nlohmann::ordered_json PointsToJson(std::span<const CartographyPoint> points);
std::vector<CartographyPoint> PointsFromJson(
    const nlohmann::ordered_json& document);

std::string PointsToCsv(std::span<const CartographyPoint> points);
// Scatter of variability (x) against confidence (y), one <circle> per point,
// colored by region.
std::string PointsToSvg(std::span<const CartographyPoint> points);

// Writes the CSV, and the SVG when svg_path is given.
void ExportMap(std::span<const CartographyPoint> points,
               const std::filesystem::path& csv_path,
               const std::optional<std::filesystem::path>& svg_path);

}  // namespace vlnprep

#endif  // VLNPREP_CARTOGRAPHY_H_
