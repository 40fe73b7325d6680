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

#include "vlnprep/cartography.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "vlnprep/corpus.h"
#include "vlnprep/error.h"
#include "vlnprep/rng.h"

namespace vlnprep {
namespace {

using nlohmann::ordered_json;

void CheckProbability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("probability " + std::to_string(p) +
                          " outside [0, 1]");
  }
}

std::size_t RoundHalfUp(double value) {
  return static_cast<std::size_t>(std::floor(value + 0.5));
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Indices ordered by key descending, sample_id ascending among equals.
template <typename Key>
std::vector<std::size_t> RankDescending(std::span<const CartographyPoint> points,
                                        Key key) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ka = key(points[a]);
    const double kb = key(points[b]);
    if (ka != kb) return ka > kb;
    return points[a].sample_id < points[b].sample_id;
  });
  return order;
}

}  // namespace

std::string_view RegionName(Region region) {
  switch (region) {
    case Region::kEasy: return "easy";
    case Region::kAmbiguous: return "ambiguous";
    case Region::kHard: return "hard";
  }
  return "";
}

Region ParseRegion(std::string_view name) {
  if (name == "easy") return Region::kEasy;
  if (name == "ambiguous") return Region::kAmbiguous;
  if (name == "hard") return Region::kHard;
  throw ValidationError("unknown region '" + std::string(name) + "'");
}

SelectionPolicy ParseSelectionPolicy(std::string_view name) {
  if (name == "random") return SelectionPolicy::kRandom;
  if (name == "cut_amb") return SelectionPolicy::kCutAmbiguous;
  if (name == "top_amb") return SelectionPolicy::kTopAmbiguous;
  if (name == "top_conf") return SelectionPolicy::kTopConfidence;
  throw UsageError("unknown selection policy '" + std::string(name) + "'");
}

std::string_view SelectionPolicyName(SelectionPolicy policy) {
  switch (policy) {
    case SelectionPolicy::kRandom: return "random";
    case SelectionPolicy::kCutAmbiguous: return "cut_amb";
    case SelectionPolicy::kTopAmbiguous: return "top_amb";
    case SelectionPolicy::kTopConfidence: return "top_conf";
  }
  return "";
}

double TrajectoryProbability(std::span<const double> step_probs) {
  if (step_probs.empty()) {
    throw ValidationError("trajectory probability needs at least one step");
  }
  double product = 1.0;
  for (double p : step_probs) {
    CheckProbability(p);
    product *= p;
  }
  return product;
}

std::vector<CartographyPoint> ComputeMap(const DynamicsLog& log) {
  std::vector<CartographyPoint> points;
  points.reserve(log.size());
  std::size_t epochs = 0;
  for (const auto& [id, records] : log) {
    try {
      if (records.empty()) throw ValidationError("no epochs recorded");
      if (epochs == 0) {
        epochs = records.size();
      } else if (records.size() != epochs) {
        throw ValidationError("has " + std::to_string(records.size()) +
                              " epochs, expected " + std::to_string(epochs));
      }
      std::vector<double> probs;
      probs.reserve(records.size());
      for (const auto& record : records) {
        if (const auto* steps = std::get_if<std::vector<double>>(&record)) {
          probs.push_back(TrajectoryProbability(*steps));
        } else {
          const double p = std::get<double>(record);
          CheckProbability(p);
          probs.push_back(p);
        }
      }
      const double e = static_cast<double>(probs.size());
      double sum = 0.0;
      for (double p : probs) sum += p;
      const double mean = sum / e;
      double squares = 0.0;
      for (double p : probs) squares += (p - mean) * (p - mean);
      // sqrt(S) / sqrt(E) equals sqrt(S / E) and rounds better on short logs.
      const double sd = std::sqrt(squares) / std::sqrt(e);
      points.push_back({id, mean, sd, std::nullopt});
    } catch (const ValidationError& err) {
      throw ValidationError("sample_id '" + id + "': " + err.what());
    }
  }
  return points;
}

double VariabilityQuantile(std::span<const CartographyPoint> points, double q) {
  if (points.empty()) throw ValidationError("quantile of an empty point set");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile must be in [0, 1]");
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.variability);
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

std::vector<CartographyPoint> ClassifyRegions(
    std::vector<CartographyPoint> points, double mu_threshold,
    double sigma_split) {
  if (points.empty()) return points;
  const double cut = VariabilityQuantile(points, sigma_split);
  for (auto& p : points) {
    if (p.variability > cut) {
      p.region = Region::kAmbiguous;
    } else {
      p.region = p.confidence >= mu_threshold ? Region::kEasy : Region::kHard;
    }
  }
  return points;
}

std::vector<std::string> SelectSubset(std::span<const CartographyPoint> points,
                                      SelectionPolicy policy, double fraction,
                                      uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("selection fraction must be in [0, 1]");
  }
  const std::size_t n = points.size();
  const std::size_t k =
      std::min(n, RoundHalfUp(fraction * static_cast<double>(n)));

  std::vector<std::string> out;
  switch (policy) {
    case SelectionPolicy::kRandom: {
      std::vector<std::string> ids;
      ids.reserve(n);
      for (const auto& p : points) ids.push_back(p.sample_id);
      std::sort(ids.begin(), ids.end());
      Rng rng(seed);
      rng.ShufflePrefix(std::span<std::string>(ids), k);
      out.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
      break;
    }
    case SelectionPolicy::kCutAmbiguous:
    case SelectionPolicy::kTopAmbiguous: {
      const auto order = RankDescending(
          points, [](const CartographyPoint& p) { return p.variability; });
      const bool top = policy == SelectionPolicy::kTopAmbiguous;
      const std::size_t begin = top ? 0 : k;
      const std::size_t end = top ? k : n;
      for (std::size_t r = begin; r < end; ++r) {
        out.push_back(points[order[r]].sample_id);
      }
      break;
    }
    case SelectionPolicy::kTopConfidence: {
      const auto order = RankDescending(
          points, [](const CartographyPoint& p) { return p.confidence; });
      for (std::size_t r = 0; r < k; ++r) out.push_back(points[order[r]].sample_id);
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

DynamicsLog ParseDynamics(const ordered_json& document) {
  if (!document.is_object()) {
    throw ValidationError("dynamics file must map sample_id to records");
  }
  DynamicsLog log;
  for (const auto& [id, node] : document.items()) {
    auto fail = [&](const std::string& what) {
      throw ValidationError("sample_id '" + id + "': " + what);
    };
    auto epochs = node.find("epochs");
    if (!node.is_object() || epochs == node.end() || !epochs->is_array()) {
      fail("missing 'epochs' array");
    }
    std::vector<EpochRecord> records;
    for (const auto& e : *epochs) {
      if (e.is_number()) {
        records.emplace_back(e.get<double>());
      } else if (e.is_array()) {
        std::vector<double> steps;
        for (const auto& s : e) {
          if (!s.is_number()) fail("non-numeric step probability");
          steps.push_back(s.get<double>());
        }
        records.emplace_back(std::move(steps));
      } else {
        fail("epoch entry must be a number or an array of numbers");
      }
    }
    log.emplace(id, std::move(records));
  }
  return log;
}

DynamicsLog LoadDynamics(const std::filesystem::path& path) {
  try {
    return ParseDynamics(ReadJsonFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ordered_json PointsToJson(std::span<const CartographyPoint> points) {
  ordered_json out = ordered_json::array();
  for (const auto& p : points) {
    ordered_json item = {{"sample_id", p.sample_id},
                         {"confidence", p.confidence},
                         {"variability", p.variability}};
    if (p.region) item["region"] = RegionName(*p.region);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<CartographyPoint> PointsFromJson(const ordered_json& document) {
  const ordered_json* items = &document;
  if (document.is_object()) {
    auto it = document.find("points");
    if (it == document.end()) throw ValidationError("no 'points' array");
    items = &*it;
  }
  if (!items->is_array()) throw ValidationError("points must be an array");
  std::vector<CartographyPoint> points;
  try {
    for (const auto& item : *items) {
      CartographyPoint p;
      p.sample_id = item.at("sample_id").get<std::string>();
      p.confidence = item.at("confidence").get<double>();
      p.variability = item.at("variability").get<double>();
      if (auto r = item.find("region"); r != item.end()) {
        p.region = ParseRegion(r->get<std::string>());
      }
      points.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed points: ") + e.what());
  }
  return points;
}

std::string PointsToCsv(std::span<const CartographyPoint> points) {
  std::ostringstream out;
  out << "sample_id,confidence,variability,region\n";
  for (const auto& p : points) {
    out << p.sample_id << ',' << FormatDouble(p.confidence) << ','
        << FormatDouble(p.variability) << ','
        << (p.region ? RegionName(*p.region) : "") << '\n';
  }
  return out.str();
}

std::string PointsToSvg(std::span<const CartographyPoint> points) {
  // Plot area: variability in [0, 0.5] on x, confidence in [0, 1] on y.
  constexpr double kWidth = 480, kHeight = 480, kMargin = 40;
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  auto color = [](const CartographyPoint& p) {
    if (!p.region) return "#7f7f7f";
    switch (*p.region) {
      case Region::kEasy: return "#1f77b4";
      case Region::kAmbiguous: return "#d62728";
      case Region::kHard: return "#2ca02c";
    }
    return "#7f7f7f";
  };
  std::ostringstream out;
  char buf[160];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\">\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" "
                "fill=\"none\" stroke=\"black\"/>\n",
                kMargin, kMargin, plot_w, plot_h);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">variability"
                "</text>\n",
                kWidth / 2, kHeight - 10);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"12\" y=\"%g\" transform=\"rotate(-90 12 %g)\" "
                "text-anchor=\"middle\">confidence</text>\n",
                kHeight / 2, kHeight / 2);
  out << buf;
  for (const auto& p : points) {
    const double x = kMargin + std::clamp(p.variability / 0.5, 0.0, 1.0) * plot_w;
    const double y = kMargin + (1.0 - std::clamp(p.confidence, 0.0, 1.0)) * plot_h;
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"3\" fill=\"%s\"/>\n", x,
                  y, color(p));
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

void ExportMap(std::span<const CartographyPoint> points,
               const std::filesystem::path& csv_path,
               const std::optional<std::filesystem::path>& svg_path) {
  WriteFile(csv_path, PointsToCsv(points));
  if (svg_path) WriteFile(*svg_path, PointsToSvg(points));
}

}  // namespace vlnprep
