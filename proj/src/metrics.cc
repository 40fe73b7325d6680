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

#include "vlnprep/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "vlnprep/error.h"
#include "vlnprep/parallel.h"

namespace vlnprep {
namespace {

using nlohmann::ordered_json;

void CheckEpisode(const EnvironmentGraph& graph, const Episode& episode) {
  ValidatePath(graph, episode.reference_path, 2);
  ValidatePath(graph, episode.predicted_path, 1);
}

double Geodesic(const EnvironmentGraph& graph, GeodesicCache* cache,
                const std::string& from, const std::string& to) {
  if (cache != nullptr) return cache->Between(graph, from, to);
  GeodesicCache local;
  return local.Between(graph, from, to);
}

double RoundTenth(double v) { return std::round(v * 10.0) / 10.0; }

using CellKey = std::tuple<std::size_t, std::size_t>;  // (bin lo, steps)

std::vector<std::string> StringArray(const ordered_json& node,
                                     const std::string& id, const char* field) {
  auto it = node.find(field);
  if (it == node.end() || !it->is_array()) {
    throw ValidationError("episode '" + id + "': field '" + field +
                          "' missing or not an array");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ValidationError("episode '" + id + "': field '" + field +
                            "' has a non-string entry");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

int Success(const EnvironmentGraph& graph, const Episode& episode,
            double threshold, GeodesicCache* cache) {
  CheckEpisode(graph, episode);
  const double d = Geodesic(graph, cache, episode.predicted_path.back(),
                            episode.reference_path.back());
  return d <= threshold ? 1 : 0;
}

double Spl(const EnvironmentGraph& graph, const Episode& episode,
           double threshold, GeodesicCache* cache) {
  CheckEpisode(graph, episode);
  if (episode.predicted_path.front() != episode.reference_path.front()) {
    throw ValidationError("SPL: predicted path starts at '" +
                          episode.predicted_path.front() +
                          "', reference at '" + episode.reference_path.front() +
                          "'");
  }
  const double shortest = Geodesic(graph, cache, episode.reference_path.front(),
                                   episode.reference_path.back());
  if (shortest <= 0.0) {
    throw ValidationError("SPL: zero-length reference (start == goal)");
  }
  if (Success(graph, episode, threshold, cache) == 0) return 0.0;
  const double taken = PathLength(graph, episode.predicted_path);
  return shortest / std::max(shortest, taken);
}

double DtwDistance(const EnvironmentGraph& graph,
                   const std::vector<std::string>& predicted,
                   const std::vector<std::string>& reference,
                   GeodesicCache* cache) {
  if (predicted.empty() || reference.empty()) {
    throw ValidationError("DTW needs two nonempty paths");
  }
  GeodesicCache local;
  GeodesicCache& rows = cache != nullptr ? *cache : local;

  const std::size_t n = predicted.size();
  const std::size_t m = reference.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // dtw[i][j] over the prefix lengths i, j with dtw[0][0] = 0.
  std::vector<double> prev(m + 1, kInf);
  std::vector<double> cur(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = kInf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double cost =
          rows.Between(graph, predicted[i - 1], reference[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double Ndtw(const EnvironmentGraph& graph, const Episode& episode,
            double threshold, GeodesicCache* cache) {
  CheckEpisode(graph, episode);
  if (!(threshold > 0.0)) throw ValidationError("nDTW threshold must be > 0");
  const double dtw =
      DtwDistance(graph, episode.predicted_path, episode.reference_path, cache);
  return std::exp(-dtw / (static_cast<double>(episode.reference_path.size()) *
                          threshold));
}

EvalReport Evaluate(const std::map<std::string, EnvironmentGraph>& graphs,
                    const std::vector<Episode>& episodes,
                    const Dataset* dataset, double threshold,
                    std::size_t bin_width) {
  if (bin_width == 0) throw ValidationError("length bin width must be >= 1");
  EvalReport report;
  report.threshold = threshold;
  report.bin_width = bin_width;

  std::vector<std::size_t> order(episodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return episodes[a].instruction_id < episodes[b].instruction_id;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (episodes[order[i]].instruction_id ==
        episodes[order[i - 1]].instruction_id) {
      throw ValidationError("duplicate instruction_id '" +
                            episodes[order[i]].instruction_id + "'");
    }
  }

  std::map<std::string, const Sample*> by_path;
  if (dataset != nullptr) {
    for (const auto& s : dataset->samples) by_path.emplace(s.path_id, &s);
  }

  GeodesicCache cache;
  report.episodes.resize(episodes.size());
  ParallelFor(order.size(), [&](std::size_t k) {
    const Episode& ep = episodes[order[k]];
    try {
      auto g = graphs.find(ep.scan);
      if (g == graphs.end()) {
        throw ValidationError("no graph loaded for scan '" + ep.scan + "'");
      }
      EpisodeResult r;
      r.instruction_id = ep.instruction_id;
      r.scan = ep.scan;
      r.success = Success(g->second, ep, threshold, &cache);
      r.spl = Spl(g->second, ep, threshold, &cache);
      r.ndtw = Ndtw(g->second, ep, threshold, &cache);
      r.reference_steps = ep.reference_path.size() - 1;
      if (dataset != nullptr) {
        const auto cut = ep.instruction_id.rfind('_');
        if (cut == std::string::npos) {
          throw ValidationError("cannot map to a dataset instruction; "
                                "expected '<path_id>_<index>'");
        }
        const std::string path_id = ep.instruction_id.substr(0, cut);
        const std::string index_text = ep.instruction_id.substr(cut + 1);
        auto s = by_path.find(path_id);
        std::size_t index = 0;
        try {
          index = std::stoul(index_text);
        } catch (const std::exception&) {
          throw ValidationError("instruction index '" + index_text +
                                "' is not a number");
        }
        if (s == by_path.end() || index >= s->second->instructions.size()) {
          throw ValidationError("no instruction " + index_text +
                                " for path_id '" + path_id + "' in dataset");
        }
        const Instruction& ins = s->second->instructions[index];
        r.instruction_words = WordCount(Tokenize(ins.text, ins.language));
      }
      report.episodes[k] = std::move(r);
    } catch (const ValidationError& e) {
      throw ValidationError("instruction_id '" + ep.instruction_id +
                            "': " + e.what());
    }
  });

  if (!report.episodes.empty()) {
    double sr = 0.0, spl = 0.0, ndtw = 0.0;
    for (const auto& r : report.episodes) {
      sr += r.success;
      spl += r.spl;
      ndtw += r.ndtw;
    }
    const double n = static_cast<double>(report.episodes.size());
    report.sr = 100.0 * sr / n;
    report.spl = 100.0 * spl / n;
    report.ndtw = 100.0 * ndtw / n;
  }

  if (dataset != nullptr) {
    std::map<CellKey, std::pair<std::size_t, std::size_t>> cells;
    for (const auto& r : report.episodes) {
      const std::size_t lo = (r.instruction_words / bin_width) * bin_width;
      auto& [count, hits] = cells[{lo, r.reference_steps}];
      ++count;
      hits += static_cast<std::size_t>(r.success);
    }
    for (const auto& [key, tally] : cells) {
      BreakdownCell c;
      c.length_bin_lo = std::get<0>(key);
      c.length_bin_hi = c.length_bin_lo + bin_width;
      c.steps = std::get<1>(key);
      c.count = tally.first;
      c.successes = tally.second;
      c.sr = 100.0 * static_cast<double>(tally.second) /
             static_cast<double>(tally.first);
      report.breakdown.push_back(c);
    }
  }
  return report;
}

double Sra(const EvalReport& x, const EvalReport& y) {
  std::map<std::string, int> xs, ys;
  for (const auto& r : x.episodes) xs[r.instruction_id] = r.success;
  for (const auto& r : y.episodes) ys[r.instruction_id] = r.success;

  std::vector<std::string> only;
  for (const auto& [id, bit] : xs) {
    if (!ys.contains(id)) only.push_back(id);
  }
  for (const auto& [id, bit] : ys) {
    if (!xs.contains(id)) only.push_back(id);
  }
  if (!only.empty()) {
    std::sort(only.begin(), only.end());
    std::string list;
    for (const auto& id : only) list += (list.empty() ? "" : ", ") + id;
    throw ValidationError("SRA: instruction id sets differ: " + list);
  }
  if (xs.empty()) throw ValidationError("SRA: no instructions to compare");

  std::size_t agree = 0;
  for (const auto& [id, bit] : xs) agree += bit == ys.at(id) ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(xs.size());
}

std::vector<DeltaCell> DeltaSr(const EvalReport& a, const EvalReport& b) {
  if (a.bin_width != b.bin_width) {
    throw ValidationError("delta: reports use different length bin widths");
  }
  std::map<CellKey, DeltaCell> cells;
  auto cell_for = [&](const BreakdownCell& c) -> DeltaCell& {
    DeltaCell& d = cells[{c.length_bin_lo, c.steps}];
    d.length_bin_lo = c.length_bin_lo;
    d.length_bin_hi = c.length_bin_hi;
    d.steps = c.steps;
    return d;
  };
  std::map<CellKey, double> sr_a;
  for (const auto& c : a.breakdown) {
    cell_for(c).count_a = c.count;
    sr_a[{c.length_bin_lo, c.steps}] = c.sr;
  }
  for (const auto& c : b.breakdown) {
    DeltaCell& d = cell_for(c);
    d.count_b = c.count;
    if (auto it = sr_a.find({c.length_bin_lo, c.steps}); it != sr_a.end()) {
      d.delta_sr = it->second - c.sr;
    }
  }
  std::vector<DeltaCell> out;
  for (auto& [key, cell] : cells) out.push_back(cell);
  return out;
}

std::vector<Episode> ParseEpisodes(const ordered_json& document) {
  if (!document.is_array()) {
    throw ValidationError("episodes file must be a JSON array");
  }
  std::vector<Episode> out;
  for (std::size_t i = 0; i < document.size(); ++i) {
    const auto& node = document[i];
    if (!node.is_object()) {
      throw ValidationError("episode #" + std::to_string(i) + " is not an object");
    }
    Episode ep;
    auto id = node.find("instruction_id");
    if (id == node.end() || !(id->is_string() || id->is_number_integer())) {
      throw ValidationError("episode #" + std::to_string(i) +
                            ": missing 'instruction_id'");
    }
    ep.instruction_id = id->is_string() ? id->get<std::string>()
                                        : std::to_string(id->get<long long>());
    auto scan = node.find("scan");
    if (scan == node.end() || !scan->is_string()) {
      throw ValidationError("episode '" + ep.instruction_id +
                            "': missing string 'scan'");
    }
    ep.scan = scan->get<std::string>();
    ep.predicted_path = StringArray(node, ep.instruction_id, "predicted_path");
    ep.reference_path = StringArray(node, ep.instruction_id, "reference_path");
    out.push_back(std::move(ep));
  }
  return out;
}

std::vector<Episode> LoadEpisodes(const std::filesystem::path& path) {
  try {
    return ParseEpisodes(ReadJsonFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ordered_json ReportToJson(const EvalReport& report) {
  ordered_json doc;
  doc["threshold"] = report.threshold;
  ordered_json episodes = ordered_json::array();
  for (const auto& r : report.episodes) {
    episodes.push_back({{"instruction_id", r.instruction_id},
                        {"scan", r.scan},
                        {"success", r.success},
                        {"spl", r.spl},
                        {"ndtw", r.ndtw},
                        {"instruction_words", r.instruction_words},
                        {"reference_steps", r.reference_steps}});
  }
  doc["episodes"] = std::move(episodes);
  doc["aggregates"] = {{"count", report.episodes.size()},
                       {"SR", RoundTenth(report.sr)},
                       {"SPL", RoundTenth(report.spl)},
                       {"nDTW", RoundTenth(report.ndtw)}};
  if (!report.breakdown.empty()) {
    ordered_json cells = ordered_json::array();
    for (const auto& c : report.breakdown) {
      cells.push_back({{"length_bin", {c.length_bin_lo, c.length_bin_hi}},
                       {"steps", c.steps},
                       {"count", c.count},
                       {"successes", c.successes},
                       {"SR", RoundTenth(c.sr)}});
    }
    doc["breakdown"] = {{"bin_width", report.bin_width},
                        {"cells", std::move(cells)}};
  }
  return doc;
}

EvalReport ReportFromJson(const ordered_json& document) {
  try {
    EvalReport r;
    r.threshold = document.value("threshold", kDefaultSuccessThreshold);
    for (const auto& e : document.at("episodes")) {
      EpisodeResult ep;
      ep.instruction_id = e.at("instruction_id").get<std::string>();
      ep.scan = e.value("scan", "");
      ep.success = e.at("success").get<int>();
      ep.spl = e.value("spl", 0.0);
      ep.ndtw = e.value("ndtw", 0.0);
      ep.instruction_words = e.value("instruction_words", std::size_t{0});
      ep.reference_steps = e.value("reference_steps", std::size_t{0});
      if (ep.success != 0 && ep.success != 1) {
        throw ValidationError("episode '" + ep.instruction_id +
                              "': success must be 0 or 1");
      }
      r.episodes.push_back(std::move(ep));
    }
    if (auto agg = document.find("aggregates"); agg != document.end()) {
      r.sr = agg->value("SR", 0.0);
      r.spl = agg->value("SPL", 0.0);
      r.ndtw = agg->value("nDTW", 0.0);
    }
    if (auto bd = document.find("breakdown"); bd != document.end()) {
      r.bin_width = bd->at("bin_width").get<std::size_t>();
      for (const auto& c : bd->at("cells")) {
        BreakdownCell cell;
        cell.length_bin_lo = c.at("length_bin").at(0).get<std::size_t>();
        cell.length_bin_hi = c.at("length_bin").at(1).get<std::size_t>();
        cell.steps = c.at("steps").get<std::size_t>();
        cell.count = c.at("count").get<std::size_t>();
        cell.successes = c.at("successes").get<std::size_t>();
        if (cell.count == 0 || cell.successes > cell.count) {
          throw ValidationError("breakdown cell with inconsistent counts");
        }
        cell.sr = 100.0 * static_cast<double>(cell.successes) /
                  static_cast<double>(cell.count);
        r.breakdown.push_back(cell);
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

std::string ReportToCsv(const EvalReport& report) {
  std::ostringstream out;
  out << "instruction_id,scan,success,spl,ndtw\n";
  char buf[64];
  for (const auto& r : report.episodes) {
    out << r.instruction_id << ',' << r.scan << ',' << r.success << ',';
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.spl, r.ndtw);
    out << buf << '\n';
  }
  return out.str();
}

ordered_json DeltaToJson(const std::vector<DeltaCell>& cells) {
  ordered_json out = ordered_json::array();
  for (const auto& c : cells) {
    ordered_json cell = {{"length_bin", {c.length_bin_lo, c.length_bin_hi}},
                         {"steps", c.steps},
                         {"count_a", c.count_a},
                         {"count_b", c.count_b}};
    cell["delta_SR"] =
        c.delta_sr ? ordered_json(RoundTenth(*c.delta_sr)) : ordered_json();
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace vlnprep
