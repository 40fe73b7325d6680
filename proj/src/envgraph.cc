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

#include "vlnprep/envgraph.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "vlnprep/error.h"

namespace vlnprep {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double NumberField(const nlohmann::ordered_json& node, const char* name,
                   const std::string& id) {
  auto it = node.find(name);
  if (it == node.end()) return 0.0;
  if (!it->is_number()) {
    throw ValidationError("node '" + id + "': field '" + name +
                          "' is not a number");
  }
  return it->get<double>();
}

}  // namespace

double Distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void EnvironmentGraph::AddNode(const std::string& id, Position position) {
  if (index_.contains(id)) {
    throw ValidationError("scan '" + scan_ + "': duplicate node id '" + id +
                          "'");
  }
  index_.emplace(id, ids_.size());
  ids_.push_back(id);
  positions_.push_back(position);
  adjacency_.emplace_back();
}

void EnvironmentGraph::AddEdge(const std::string& a, const std::string& b) {
  auto ia = index_.find(a);
  auto ib = index_.find(b);
  if (ia == index_.end() || ib == index_.end()) {
    const std::string& missing = ia == index_.end() ? a : b;
    throw ValidationError("scan '" + scan_ + "': edge [" + a + ", " + b +
                          "] names unknown node '" + missing + "'");
  }
  const std::size_t u = ia->second;
  const std::size_t v = ib->second;
  if (u == v || HasEdge(a, b)) return;
  const double w = Distance(positions_[u], positions_[v]);
  adjacency_[u].push_back({v, w});
  adjacency_[v].push_back({u, w});
}

bool EnvironmentGraph::HasNode(std::string_view id) const {
  return index_.contains(std::string(id));
}

bool EnvironmentGraph::HasEdge(std::string_view a, std::string_view b) const {
  auto ia = index_.find(std::string(a));
  auto ib = index_.find(std::string(b));
  if (ia == index_.end() || ib == index_.end()) return false;
  const auto& row = adjacency_[ia->second];
  return std::any_of(row.begin(), row.end(), [&](const Neighbor& n) {
    return n.node == ib->second;
  });
}

std::size_t EnvironmentGraph::IndexOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw ValidationError("scan '" + scan_ + "': unknown viewpoint '" +
                          std::string(id) + "'");
  }
  return it->second;
}

EnvironmentGraph ParseGraph(const nlohmann::ordered_json& document) {
  if (!document.is_object()) {
    throw ValidationError("graph file must be a JSON object");
  }
  auto scan = document.find("scan");
  if (scan == document.end() || !scan->is_string()) {
    throw ValidationError("graph file: missing string field 'scan'");
  }
  EnvironmentGraph graph(scan->get<std::string>());

  if (auto nodes = document.find("nodes"); nodes != document.end()) {
    if (!nodes->is_array()) {
      throw ValidationError("graph '" + graph.scan() + "': 'nodes' not an array");
    }
    for (const auto& node : *nodes) {
      auto id = node.find("id");
      if (!node.is_object() || id == node.end() || !id->is_string()) {
        throw ValidationError("graph '" + graph.scan() +
                              "': node without string 'id'");
      }
      const std::string name = id->get<std::string>();
      graph.AddNode(name, Position{NumberField(node, "x", name),
                                   NumberField(node, "y", name),
                                   NumberField(node, "z", name)});
    }
  }
  if (auto edges = document.find("edges"); edges != document.end()) {
    if (!edges->is_array()) {
      throw ValidationError("graph '" + graph.scan() + "': 'edges' not an array");
    }
    for (const auto& edge : *edges) {
      if (!edge.is_array() || edge.size() != 2 || !edge[0].is_string() ||
          !edge[1].is_string()) {
        throw ValidationError("graph '" + graph.scan() +
                              "': edge must be a pair of strings");
      }
      graph.AddEdge(edge[0].get<std::string>(), edge[1].get<std::string>());
    }
  }
  return graph;
}

EnvironmentGraph LoadGraph(const std::filesystem::path& path) {
  try {
    return ParseGraph(ReadJsonFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::map<std::string, EnvironmentGraph> LoadGraphs(
    const std::filesystem::path& directory) {
  std::error_code ec;
  if (!std::filesystem::is_directory(directory, ec)) {
    throw ValidationError("'" + directory.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, EnvironmentGraph> graphs;
  for (const auto& file : files) {
    EnvironmentGraph g = LoadGraph(file);
    const std::string scan = g.scan();
    if (!graphs.emplace(scan, std::move(g)).second) {
      throw ValidationError(file.string() + ": duplicate scan '" + scan + "'");
    }
  }
  return graphs;
}

std::vector<double> GeodesicRow(const EnvironmentGraph& graph,
                                std::size_t source) {
  std::vector<double> dist(graph.node_count(), kInf);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  dist[source] = 0.0;
  frontier.push({0.0, source});
  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (d > dist[u]) continue;
    for (const auto& n : graph.Neighbors(u)) {
      const double candidate = d + n.weight;
      if (candidate < dist[n.node]) {
        dist[n.node] = candidate;
        frontier.push({candidate, n.node});
      }
    }
  }
  return dist;
}

GeodesicTable Geodesic(const EnvironmentGraph& graph, std::string_view source) {
  const std::size_t s = graph.IndexOf(source);
  const std::vector<double> row = GeodesicRow(graph, s);
  GeodesicTable table;
  table.source = std::string(source);
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (std::isfinite(row[i])) table.distances.emplace(graph.IdAt(i), row[i]);
  }
  return table;
}

const std::vector<double>& GeodesicCache::Row(const EnvironmentGraph& graph,
                                              std::size_t source) {
  const auto key = std::make_pair(graph.scan(), source);
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = rows_.find(key); it != rows_.end()) return *it->second;
  }
  auto row = std::make_shared<const std::vector<double>>(
      GeodesicRow(graph, source));
  std::lock_guard<std::mutex> lock(mu_);
  // Racing writers compute identical rows. The first stored row is kept so
  // references handed out earlier stay valid.
  auto [it, inserted] = rows_.try_emplace(key, std::move(row));
  return *it->second;
}

double GeodesicCache::Between(const EnvironmentGraph& graph,
                              std::string_view from, std::string_view to) {
  const std::size_t a = graph.IndexOf(from);
  const std::size_t b = graph.IndexOf(to);
  const double d = Row(graph, a)[b];
  if (!std::isfinite(d)) {
    throw ValidationError("scan '" + graph.scan() + "': '" + std::string(to) +
                          "' is unreachable from '" + std::string(from) + "'");
  }
  return d;
}

void ValidatePath(const EnvironmentGraph& graph,
                  std::span<const std::string> path, std::size_t min_length) {
  if (path.size() < min_length) {
    throw ValidationError("path length < " + std::to_string(min_length));
  }
  for (const auto& id : path) graph.IndexOf(id);
  for (std::size_t i = 1; i < path.size(); ++i) {
    // Repeating a viewpoint is a stay, not a move.
    if (path[i - 1] == path[i]) continue;
    if (!graph.HasEdge(path[i - 1], path[i])) {
      throw ValidationError("scan '" + graph.scan() + "': no edge between '" +
                            path[i - 1] + "' and '" + path[i] + "'");
    }
  }
}

void ValidateTrajectory(const EnvironmentGraph& graph, const Sample& sample) {
  try {
    if (sample.scan != graph.scan()) {
      throw ValidationError("scan mismatch: sample has '" + sample.scan +
                            "', graph is '" + graph.scan() + "'");
    }
    ValidatePath(graph, sample.path, 2);
  } catch (const ValidationError& e) {
    throw ValidationError("path_id '" + sample.path_id + "': " + e.what());
  }
}

double PathLength(const EnvironmentGraph& graph,
                  std::span<const std::string> path) {
  ValidatePath(graph, path, 1);
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    total += Distance(graph.PositionAt(graph.IndexOf(path[i - 1])),
                      graph.PositionAt(graph.IndexOf(path[i])));
  }
  return total;
}

}  // namespace vlnprep
