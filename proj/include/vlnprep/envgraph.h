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

#ifndef VLNPREP_ENVGRAPH_H_
#define VLNPREP_ENVGRAPH_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vlnprep/corpus.h"

namespace vlnprep {

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double Distance(const Position& a, const Position& b);

// Undirected viewpoint graph of one scan. Edge weights are the Euclidean
// distances between endpoint positions. Immutable once built.
class EnvironmentGraph {
 public:
  EnvironmentGraph() = default;
  explicit EnvironmentGraph(std::string scan) : scan_(std::move(scan)) {}

  // Throws ValidationError on a duplicate id.
  void AddNode(const std::string& id, Position position);
  // Throws ValidationError when an endpoint is unknown. Self loops and
  // repeated edges are ignored.
  void AddEdge(const std::string& a, const std::string& b);

  const std::string& scan() const { return scan_; }
  std::size_t node_count() const { return ids_.size(); }
  bool HasNode(std::string_view id) const;
  bool HasEdge(std::string_view a, std::string_view b) const;
  // Throws ValidationError for an unknown id.
  std::size_t IndexOf(std::string_view id) const;
  const std::string& IdAt(std::size_t index) const { return ids_[index]; }
  const Position& PositionAt(std::size_t index) const {
    return positions_[index];
  }

  struct Neighbor {
    std::size_t node;
    double weight;
  };
  std::span<const Neighbor> Neighbors(std::size_t index) const {
    return adjacency_[index];
  }

 private:
  std::string scan_;
  std::vector<std::string> ids_;
  std::vector<Position> positions_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::unordered_map<std::string, std::size_t> index_;
};

EnvironmentGraph ParseGraph(const nlohmann::ordered_json& document);
EnvironmentGraph LoadGraph(const std::filesystem::path& path);

// Every *.json file in a directory, keyed by scan. Throws on duplicate scans.
std::map<std::string, EnvironmentGraph> LoadGraphs(
    const std::filesystem::path& directory);

// Single-source shortest path distances. Unreachable nodes are absent.
struct GeodesicTable {
  std::string source;
  std::map<std::string, double> distances;
};

// Dijkstra from source. Throws ValidationError for an unknown source.
GeodesicTable Geodesic(const EnvironmentGraph& graph, std::string_view source);

// Dense row of Geodesic distances indexed by node index; +inf when
// unreachable.
std::vector<double> GeodesicRow(const EnvironmentGraph& graph,
                                std::size_t source);

// Memoizes GeodesicRow per (scan, source). Safe for concurrent use; the graph
// must outlive the cache entries built from it.
class GeodesicCache {
 public:
  const std::vector<double>& Row(const EnvironmentGraph& graph,
                                 std::size_t source);

  // Shortest distance. Throws ValidationError naming both ends when
  // unreachable or unknown.
  double Between(const EnvironmentGraph& graph, std::string_view from,
                 std::string_view to);

 private:
  std::mutex mu_;
  std::map<std::pair<std::string, std::size_t>,
           std::shared_ptr<const std::vector<double>>>
      rows_;
};

// Checks ids exist, consecutive pairs are edges, and the path has at least
// min_length nodes.
void ValidatePath(const EnvironmentGraph& graph,
                  std::span<const std::string> path, std::size_t min_length);

// ValidatePath with the Sample invariant of length >= 2, plus a scan match
// check.
void ValidateTrajectory(const EnvironmentGraph& graph, const Sample& sample);

// Sum of Euclidean edge lengths along a valid path (length >= 1).
double PathLength(const EnvironmentGraph& graph,
                  std::span<const std::string> path);

}  // namespace vlnprep

#endif  // VLNPREP_ENVGRAPH_H_
