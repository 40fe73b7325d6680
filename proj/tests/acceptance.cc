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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "testing/synthetic.h"
#include "vlnprep/cartography.h"
#include "vlnprep/cli.h"
#include "vlnprep/corpus.h"
#include "vlnprep/envgraph.h"
#include "vlnprep/metrics.h"
#include "vlnprep/noising.h"
#include "vlnprep/rng.h"
#include "vlnprep/uogen.h"

namespace vlnprep {
namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Collects the first few failures of one criterion.
class Check {
 public:
  void Expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (notes_.size() < 3) notes_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string Summary() const {
    std::string s = std::to_string(checks_ - failures_) + "/" +
                    std::to_string(checks_) + " checks";
    for (const auto& n : notes_) s += "; " + n;
    return s;
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> notes_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// limit <= 0 means the criterion has no runtime bound.
Outcome Finish(const Check& c, double seconds, double limit = 0.0) {
  char buf[64];
  if (limit > 0.0) {
    std::snprintf(buf, sizeof buf, "%.2f s (limit %.0f s), ", seconds, limit);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f s, ", seconds);
  }
  const bool in_time = limit <= 0.0 || seconds < limit;
  return {c.ok() && in_time,
          std::string(buf) + c.Summary() + (in_time ? "" : "; too slow")};
}

std::multiset<std::string> Bag(const Sentence& s) { return {s.begin(), s.end()}; }

Outcome ShuffleSuite() {
  const auto start = Clock::now();
  Check c;
  std::mt19937_64 gen(1001);
  std::size_t multi = 0, multi_changed = 0, single = 0, single_changed = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t sentences = 1 + gen() % 4;
    const TokenizedInstruction t =
        Tokenize(testing::RandomInstruction(sentences, gen), Language::kEnUs);
    const uint64_t seed = gen();

    const auto w = ShuffleInstruction(t, ShuffleMode::kWord, seed);
    bool same_bags = w.sentences.size() == t.sentences.size();
    for (std::size_t s = 0; same_bags && s < t.sentences.size(); ++s) {
      same_bags = Bag(w.sentences[s]) == Bag(t.sentences[s]);
    }
    c.Expect(same_bags, "sf-word changed a sentence multiset");

    const auto s = ShuffleInstruction(t, ShuffleMode::kSentence, seed);
    if (t.sentences.size() >= 2) {
      ++multi;
      multi_changed += s.sentences != t.sentences;
    } else {
      ++single;
      single_changed += s.sentences != t.sentences;
    }

    const auto all = ShuffleInstruction(t, ShuffleMode::kAll, seed);
    bool one_sentence = all.sentences.size() == 1 && all.sentences[0].back() == ".";
    if (one_sentence) {
      const auto& toks = all.sentences[0];
      one_sentence = std::count_if(toks.begin(), toks.end(), [](const std::string& x) {
                       return IsPunctuation(x);
                     }) == 1;
    }
    c.Expect(one_sentence, "sf-all output not a single '.'-terminated sentence");
  }
  c.Expect(multi_changed == multi,
           "sf-sent left " + std::to_string(multi - multi_changed) +
               " multi-sentence instructions in order");
  c.Expect(single_changed == 0, "sf-sent changed a single-sentence instruction");
  c.Expect(multi > 0 && single > 0, "fixture lacks single or multi sentences");
  return Finish(c, Seconds(start), 5.0);
}

Outcome MismatchSuite() {
  const auto start = Clock::now();
  Check c;
  std::mt19937_64 gen(2002);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + gen() % 49;
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
      Sample s{"t" + std::to_string(trial) + "-" + std::to_string(i), "scan",
               {"a", "b"}, {}};
      const std::size_t count = 1 + gen() % 4;
      for (std::size_t j = 0; j < count; ++j) {
        s.instructions.push_back({s.path_id + "/" + std::to_string(j), Language::kEnUs, ""});
      }
      d.samples.push_back(std::move(s));
    }
    const uint64_t seed = gen();

    const Dataset block = Mismatch(d, MismatchMode::kBlock, seed);
    std::size_t fixed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      fixed += block.samples[i].instructions == d.samples[i].instructions;
    }
    c.Expect(fixed == 0, "block mismatch kept " + std::to_string(fixed) +
                             " blocks in trial " + std::to_string(trial));

    const Dataset random = Mismatch(d, MismatchMode::kRandom, seed);
    std::multiset<std::string> before, after;
    bool counts = true;
    for (std::size_t i = 0; i < n; ++i) {
      counts = counts && random.samples[i].instructions.size() ==
                             d.samples[i].instructions.size();
      for (const auto& ins : d.samples[i].instructions) before.insert(ins.text);
      for (const auto& ins : random.samples[i].instructions) after.insert(ins.text);
    }
    c.Expect(counts, "random mismatch changed a count in trial " + std::to_string(trial));
    c.Expect(before == after, "random mismatch changed the multiset");
  }
  return Finish(c, Seconds(start), 5.0);
}

std::string Lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

Outcome UoSuite(const testing::TempDir& dir) {
  Check c;
  std::mt19937_64 gen(3003);
  const EnvironmentGraph g = testing::RandomGraph("uoscan", 50, gen);
  const Dataset d = testing::RandomDataset(g, 200, 3, gen);
  const DetectionSet dets = testing::RandomDetections(d, 5, gen);
  for (const auto& s : d.samples) {
    c.Expect(s.path.size() >= 4 && s.path.size() <= 7, "trajectory outside 3-6 steps");
  }
  SaveDataset(d, dir / "uo_d.json");
  WriteJsonFile(testing::DetectionsToJson(dets), dir / "uo_det.json");
  WriteJsonFile(ordered_json(testing::ObjectLabels()), dir / "uo_labels.json");
  const auto train = testing::RunCli({"uo", "train", "--dataset", (dir / "uo_d.json").string(),
                                      "--labels", (dir / "uo_labels.json").string(), "-o",
                                      (dir / "uo_model.json").string()});
  c.Expect(train.code == 0, "uo train failed: " + train.err);

  const auto start = Clock::now();
  const auto generate = testing::RunCli(
      {"uo", "generate", "--dataset", (dir / "uo_d.json").string(), "--detections",
       (dir / "uo_det.json").string(), "--model", (dir / "uo_model.json").string(),
       "--per-traj", "6", "--seed", "77", "-o", (dir / "uo_out.json").string()});
  const double seconds = Seconds(start);
  c.Expect(generate.code == 0, "uo generate failed: " + generate.err);
  if (generate.code != 0) return Finish(c, seconds, 10.0);

  const Dataset out = LoadDataset(dir / "uo_out.json");
  UnigramModel um;
  LengthDistribution ld;
  ModelFromJson(ReadJsonFile(dir / "uo_model.json"), um, ld);
  std::set<std::string> label_words;
  for (const auto& l : testing::ObjectLabels()) {
    std::istringstream words(l);
    for (std::string w; words >> w;) label_words.insert(Lower(w));
  }

  std::size_t total = 0;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const Sample& s = out.samples[i];
    const TrajectoryDetections& det = dets.at(s.path_id);
    total += s.instructions.size();
    for (std::size_t j = 0; j < s.instructions.size(); ++j) {
      const GenerationTrace t = TraceGeneration(d.samples[i], &det, um, ld, UOConfig{},
                                                DeriveSeed(77, s.path_id, j));
      c.Expect(Detokenize(t.tokens) == s.instructions[j].text,
               "trace differs from emitted text for " + s.path_id);

      // (a) object labels appear in trajectory order: the labels that follow
      // each window's fillers are its selected pool entries, and pool entries
      // come from nondecreasing panorama positions.
      const UOConfig cfg;
      std::size_t last_pano = 0;
      bool ordered = true;
      std::size_t fillers = 0;
      for (std::size_t w = 0; w < t.windows.size(); ++w) {
        const auto& win = t.windows[w];
        fillers += win.fillers.size();
        std::vector<std::string> expect = win.fillers;
        for (std::size_t idx : win.selected) {
          const std::size_t pano = w * cfg.panoramas_per_window +
                                   idx / cfg.detections_per_panorama;
          ordered = ordered && pano >= last_pano && pano < s.path.size() &&
                    det[pano][idx % cfg.detections_per_panorama].label == win.pool[idx];
          last_pano = pano;
          std::istringstream words(win.pool[idx]);
          for (std::string word; words >> word;) expect.push_back(word);
        }
        expect.push_back(".");
        ordered = ordered && t.tokens.sentences[w] == expect;
      }
      c.Expect(ordered, "object labels out of trajectory order for " + s.path_id);
      // (b) filler-padded instructions hit the sampled length exactly.
      if (fillers > 0) {
        c.Expect(WordCount(t.tokens) == t.target_length,
                 "word count differs from sampled length for " + s.path_id);
      }
      // (c) fillers never come from the detector vocabulary.
      for (const auto& win : t.windows) {
        for (const auto& f : win.fillers) {
          c.Expect(!label_words.count(Lower(f)), "filler '" + f + "' is a label word");
        }
      }
    }
  }
  c.Expect(total == 1200, "emitted " + std::to_string(total) + " instructions");
  return Finish(c, seconds, 10.0);
}

double AllPairsDistance(const std::vector<std::vector<double>>& fw,
                        const EnvironmentGraph& g, const std::string& a,
                        const std::string& b) {
  return fw[g.IndexOf(a)][g.IndexOf(b)];
}

std::vector<std::vector<double>> FloydWarshall(const EnvironmentGraph& g) {
  const std::size_t n = g.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && g.HasEdge(g.IdAt(i), g.IdAt(j))) {
        const Position& p = g.PositionAt(i);
        const Position& q = g.PositionAt(j);
        d[i][j] = std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) +
                            (p.z - q.z) * (p.z - q.z));
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

double BruteDtw(const std::vector<std::vector<double>>& fw, const EnvironmentGraph& g,
                const std::vector<std::string>& p, const std::vector<std::string>& r) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk =
      [&](std::size_t i, std::size_t j, double acc) {
        acc += AllPairsDistance(fw, g, p[i], r[j]);
        if (i + 1 == p.size() && j + 1 == r.size()) {
          best = std::min(best, acc);
          return;
        }
        if (i + 1 < p.size()) walk(i + 1, j, acc);
        if (j + 1 < r.size()) walk(i, j + 1, acc);
        if (i + 1 < p.size() && j + 1 < r.size()) walk(i + 1, j + 1, acc);
      };
  walk(0, 0, 0.0);
  return best;
}

// A shortest path from source to target recovered from Dijkstra distances.
std::vector<std::string> ShortestPath(const EnvironmentGraph& g, std::size_t source,
                                      std::size_t target) {
  const std::vector<double> row = GeodesicRow(g, source);
  std::vector<std::string> rev = {g.IdAt(target)};
  std::size_t v = target;
  while (v != source) {
    std::size_t pick = v;
    for (const auto& nb : g.Neighbors(v)) {
      if (row[nb.node] + nb.weight == row[v]) {
        pick = nb.node;
        break;
      }
    }
    if (pick == v) return {};
    v = pick;
    rev.push_back(g.IdAt(v));
  }
  return {rev.rbegin(), rev.rend()};
}

Outcome MetricsOracle() {
  const auto start = Clock::now();
  Check c;
  std::mt19937_64 gen(4004);
  for (int trial = 0; trial < 200; ++trial) {
    const EnvironmentGraph g = testing::RandomGraph("m", 3 + gen() % 8, gen);
    const auto fw = FloydWarshall(g);
    const auto p = testing::RandomWalk(g, gen() % 6, gen);
    const auto r = testing::RandomWalk(g, 1 + gen() % 5, gen);
    const double brute = BruteDtw(fw, g, p, r);
    const double want = std::exp(-brute / (static_cast<double>(r.size()) * 3.0));
    const double got = Ndtw(g, Episode{"e", "m", p, r}, 3.0);
    c.Expect(std::abs(got - want) <= 1e-9, "nDTW differs from alignment enumeration");
    c.Expect(Ndtw(g, Episode{"e", "m", r, r}, 3.0) == 1.0, "ndtw(P,P) != 1");
  }
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) % 10;
    const EnvironmentGraph g = testing::RandomGraph("f", n, gen, 0.5);
    const auto fw = FloydWarshall(g);
    for (std::size_t s = 0; s < n; ++s) {
      const auto row = GeodesicRow(g, s);
      for (std::size_t t = 0; t < n; ++t) {
        c.Expect(std::abs(row[t] - fw[s][t]) <= 1e-9, "geodesic differs from Floyd-Warshall");
      }
    }
    for (std::size_t t = 1; t < n; ++t) {
      const auto path = ShortestPath(g, 0, t);
      c.Expect(!path.empty(), "no shortest path recovered");
      if (path.empty()) continue;
      c.Expect(Spl(g, Episode{"e", "f", path, path}, 3.0) == 1.0,
               "SPL of optimal path != 1");
    }
  }
  return Finish(c, Seconds(start));
}

EvalReport Bits(const std::vector<int>& bits) {
  EvalReport r;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    EpisodeResult e;
    e.instruction_id = "i" + std::to_string(i);
    e.success = bits[i];
    r.episodes.push_back(e);
  }
  return r;
}

Outcome SraSuite() {
  const auto start = Clock::now();
  Check c;
  const EvalReport x = Bits({1, 0, 1});
  const EvalReport y = Bits({1, 1, 1});
  c.Expect(Sra(x, x) == 1.0, "sra(X,X) != 1");
  c.Expect(Sra(x, y) == Sra(y, x), "sra not symmetric");
  c.Expect(Sra(x, y) == 2.0 / 3.0, "sra fixture != 2/3");
  std::mt19937_64 gen(5005);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> a(1 + gen() % 30), b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = static_cast<int>(gen() % 2);
      b[i] = static_cast<int>(gen() % 2);
    }
    c.Expect(Sra(Bits(a), Bits(a)) == 1.0, "sra(X,X) != 1");
    c.Expect(Sra(Bits(a), Bits(b)) == Sra(Bits(b), Bits(a)), "sra not symmetric");
  }
  return Finish(c, Seconds(start));
}

Outcome CartographyOracle() {
  const auto start = Clock::now();
  Check c;
  std::mt19937_64 gen(6006);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t epochs = 1 + gen() % 10;
    const std::size_t n = 1 + gen() % 100;
    DynamicsLog log;
    std::map<std::string, std::vector<long double>> probs;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "s" + std::to_string(i);
      for (std::size_t e = 0; e < epochs; ++e) {
        if (gen() % 2) {
          const double p = u(gen);
          log[id].push_back(p);
          probs[id].push_back(p);
        } else {
          std::vector<double> steps(1 + gen() % 5);
          long double prod = 1.0L;
          for (double& s : steps) {
            s = 0.3 + 0.7 * u(gen);
            prod *= s;
          }
          log[id].push_back(steps);
          probs[id].push_back(prod);
        }
      }
    }
    for (const auto& p : ComputeMap(log)) {
      const auto& xs = probs[p.sample_id];
      long double mean = 0.0L;
      for (auto x : xs) mean += x;
      mean /= static_cast<long double>(xs.size());
      long double var = 0.0L;
      for (auto x : xs) var += (x - mean) * (x - mean);
      var /= static_cast<long double>(xs.size());
      c.Expect(std::abs(p.confidence - static_cast<double>(mean)) <= 1e-12,
               "confidence differs from two-pass oracle");
      c.Expect(std::abs(p.variability - static_cast<double>(std::sqrt(var))) <= 1e-12,
               "variability differs from two-pass oracle");
    }
  }
  DynamicsLog pair;
  pair["x"] = {0.2, 0.8};
  const auto pt = ComputeMap(pair);
  c.Expect(pt[0].confidence == 0.5 && pt[0].variability == 0.3,
           "[0.2, 0.8] did not give (0.5, 0.3) exactly");

  for (int set = 0; set < 10; ++set) {
    std::vector<CartographyPoint> pts;
    const std::size_t n = 5 + gen() % 60;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse sigmas force ties through the tiebreak.
      pts.push_back({"p" + std::to_string(gen() % 100000) + "_" + std::to_string(i),
                     u(gen), 0.05 * static_cast<double>(gen() % 6), std::nullopt});
    }
    for (double f : {0.1, 0.3, 0.5}) {
      const auto cut = SelectSubset(pts, SelectionPolicy::kCutAmbiguous, f, 0);
      const auto top = SelectSubset(pts, SelectionPolicy::kTopAmbiguous, f, 0);
      std::set<std::string> uni(cut.begin(), cut.end());
      uni.insert(top.begin(), top.end());
      std::vector<std::string> inter;
      std::set_intersection(cut.begin(), cut.end(), top.begin(), top.end(),
                            std::back_inserter(inter));
      c.Expect(uni.size() == n, "cut_amb and top_amb do not cover the ids");
      c.Expect(inter.empty(), "cut_amb and top_amb overlap");
    }
  }
  return Finish(c, Seconds(start));
}

std::vector<std::vector<std::string>> SubcommandMatrix(const testing::TempDir& dir) {
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  const std::string d = p("det_d.json");
  return {
      {"noise", "--mode", "sf-word", "--seed", "5", d},
      {"noise", "--mode", "sf-sent", "--seed", "5", d},
      {"noise", "--mode", "sf-word-sent", "--seed", "5", d},
      {"noise", "--mode", "sf-all", "--seed", "5", d},
      {"mismatch", "--mode", "block", "--seed", "5", d},
      {"mismatch", "--mode", "random", "--seed", "5", d},
      {"empty-lang", "--keep", "0.5", "--seed", "5", d},
      {"subsample", "--n", "17", "--seed", "5", d},
      {"uo", "train", "--dataset", d, "--labels", p("det_labels.json")},
      {"uo", "generate", "--dataset", d, "--detections", p("det_det.json"), "--model",
       p("det_model.json"), "--per-traj", "3", "--seed", "5"},
      {"uo", "generate", "--dataset", d, "--detections", p("det_det.json"), "--model",
       p("det_model.json"), "--per-traj", "3", "--mix", d, "--seed", "5"},
      {"uo", "generate", "--dataset", d, "--detections", p("det_det.json"), "--model",
       p("det_model.json"), "--per-traj", "2", "--shuffle-objects", "-a", "2", "-b", "3",
       "-k", "4", "--seed", "5"},
      {"uo", "generate", "--dataset", d, "--model", p("det_model_raw.json"),
       "--per-traj", "2", "--no-detector", "--seed", "5"},
      {"eval", "--graphs", p("det_graphs"), "--episodes", p("det_eps.json"), "--dataset", d},
      {"eval", "--graphs", p("det_graphs"), "--episodes", p("det_eps.json"), "--dataset", d,
       "--csv"},
      {"eval", "delta", "--a", p("det_report.json"), "--b", p("det_report.json")},
      {"carto", "map", "--dynamics", p("det_dyn.json")},
      {"carto", "classify", "--points", p("det_points.json")},
      {"carto", "select", "--points", p("det_points.json"), "--policy", "random",
       "--fraction", "0.4", "--seed", "5"},
      {"carto", "select", "--points", p("det_points.json"), "--policy", "top_conf",
       "--fraction", "0.4"},
      {"carto", "export", "--points", p("det_points.json"), "--svg", "@svg"},
  };
}

Outcome Determinism(const testing::TempDir& dir) {
  const auto start = Clock::now();
  Check c;
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  std::mt19937_64 gen(7007);
  const EnvironmentGraph g = testing::RandomGraph("detscan", 30, gen);
  const Dataset d = testing::RandomDataset(g, 60, 3, gen);
  SaveDataset(d, dir / "det_d.json");
  WriteJsonFile(testing::DetectionsToJson(testing::RandomDetections(d, 5, gen)),
                dir / "det_det.json");
  WriteJsonFile(ordered_json(testing::ObjectLabels()), dir / "det_labels.json");
  std::filesystem::create_directories(dir / "det_graphs");
  WriteJsonFile(testing::GraphToJson(g), dir / "det_graphs" / "detscan.json");
  ordered_json eps = ordered_json::array();
  for (const auto& s : d.samples) {
    eps.push_back({{"instruction_id", s.path_id + "_1"},
                   {"scan", s.scan},
                   {"predicted_path", {s.path[0], s.path[1]}},
                   {"reference_path", s.path}});
  }
  WriteJsonFile(eps, dir / "det_eps.json");
  ordered_json dyn = ordered_json::object();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    ordered_json epochs = ordered_json::array();
    for (int e = 0; e < 6; ++e) epochs.push_back(u(gen));
    dyn["k" + std::to_string(i)] = {{"epochs", epochs}};
  }
  WriteJsonFile(dyn, dir / "det_dyn.json");

  const std::vector<std::vector<std::string>> setup = {
      {"uo", "train", "--dataset", p("det_d.json"), "--labels", p("det_labels.json"), "-o",
       p("det_model.json")},
      {"uo", "train", "--dataset", p("det_d.json"), "-o", p("det_model_raw.json")},
      {"eval", "--graphs", p("det_graphs"), "--episodes", p("det_eps.json"), "--dataset",
       p("det_d.json"), "-o", p("det_report.json")},
      {"carto", "map", "--dynamics", p("det_dyn.json"), "-o", p("det_points_raw.json")},
      {"carto", "classify", "--points", p("det_points_raw.json"), "-o",
       p("det_points.json")},
  };
  for (const auto& args : setup) {
    const auto r = testing::RunCli(args);
    c.Expect(r.code == 0, args[0] + " setup failed: " + r.err);
  }

  std::size_t k = 0;
  for (auto args : SubcommandMatrix(dir)) {
    std::vector<std::string> digests;
    for (const char* threads : {"1", "4"}) {
      ::setenv("VLNPREP_THREADS", threads, 1);
      const std::string out = p("det_out" + std::to_string(k) + "_" + threads);
      std::string svg;
      auto run = args;
      for (auto& a : run) {
        if (a == "@svg") a = svg = out + ".svg";
      }
      run.insert(run.end(), {"-o", out});
      const auto r = testing::RunCli(run);
      c.Expect(r.code == 0, args[0] + " failed: " + r.err);
      if (r.code != 0) break;
      digests.push_back(FileDigest(out) + (svg.empty() ? "" : FileDigest(svg)));
    }
    ::unsetenv("VLNPREP_THREADS");
    std::string name;
    for (const auto& a : args) {
      if (a.rfind("--", 0) == 0 && a != "--mode" && a != "--policy") break;
      name += (name.empty() ? "" : " ") + a;
    }
    c.Expect(digests.size() == 2 && digests[0] == digests[1],
             "outputs differ between reruns of '" + name + "'");
    ++k;
  }
  return Finish(c, Seconds(start));
}

Outcome EndToEnd(const testing::TempDir& dir) {
  const auto start = Clock::now();
  Check c;
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  std::mt19937_64 gen(8008);
  std::filesystem::create_directories(dir / "e2e_graphs");
  Dataset d;
  for (int scan = 0; scan < 3; ++scan) {
    const EnvironmentGraph g = testing::RandomGraph("e2e" + std::to_string(scan), 40, gen);
    WriteJsonFile(testing::GraphToJson(g),
                  dir / "e2e_graphs" / (g.scan() + ".json"));
    Dataset part = testing::RandomDataset(g, 67, 3, gen);
    for (auto& s : part.samples) {
      s.path_id = g.scan() + "-" + s.path_id;
      d.samples.push_back(std::move(s));
    }
  }
  const std::size_t n = d.samples.size();
  SaveDataset(d, dir / "e2e_d.json");

  const auto empty = testing::RunCli({"empty-lang", "--keep", "0.5", "--seed", "21",
                                      p("e2e_d.json"), "-o", p("e2e_empty.json")});
  c.Expect(empty.code == 0, "empty-lang failed: " + empty.err);
  const Dataset emptied = LoadDataset(dir / "e2e_empty.json");
  std::size_t with_text = 0;
  for (const auto& s : emptied.samples) {
    const bool any = std::any_of(s.instructions.begin(), s.instructions.end(),
                                 [](const Instruction& i) { return !i.text.empty(); });
    const bool all = std::all_of(s.instructions.begin(), s.instructions.end(),
                                 [](const Instruction& i) { return !i.text.empty(); });
    c.Expect(any == all, "sample " + s.path_id + " partly emptied");
    with_text += any;
  }
  c.Expect(with_text == (n + 1) / 2, std::to_string(with_text) + " of " +
                                         std::to_string(n) + " samples kept text");

  const auto noise = testing::RunCli({"noise", "--mode", "sf-word", "--seed", "22",
                                      p("e2e_empty.json"), "-o", p("e2e_noised.json")});
  c.Expect(noise.code == 0, "noise failed: " + noise.err);
  const Dataset noised = LoadDataset(dir / "e2e_noised.json");
  bool paths_same = noised.samples.size() == n;
  for (std::size_t i = 0; paths_same && i < n; ++i) {
    paths_same = noised.samples[i].path == d.samples[i].path &&
                 noised.samples[i].path_id == d.samples[i].path_id;
  }
  c.Expect(paths_same, "trajectories changed along the pipeline");

  ordered_json eps = ordered_json::array();
  for (const auto& s : noised.samples) {
    for (std::size_t j = 0; j < s.instructions.size(); ++j) {
      eps.push_back({{"instruction_id", s.path_id + "_" + std::to_string(j)},
                     {"scan", s.scan},
                     {"predicted_path", s.path},
                     {"reference_path", s.path}});
    }
  }
  WriteJsonFile(eps, dir / "e2e_eps.json");
  const auto eval = testing::RunCli({"eval", "--graphs", p("e2e_graphs"), "--episodes",
                                     p("e2e_eps.json"), "--dataset", p("e2e_noised.json"),
                                     "-o", p("e2e_report.json")});
  c.Expect(eval.code == 0, "eval failed: " + eval.err);
  if (eval.code == 0) {
    const ordered_json report = ReadJsonFile(dir / "e2e_report.json");
    const ordered_json& sr = report.at("aggregates").at("SR");
    c.Expect(sr.is_number() && sr.get<double>() == 100.0,
             "SR = " + sr.dump() + ", expected 100.0");
  }
  return Finish(c, Seconds(start), 30.0);
}

}  // namespace
}  // namespace vlnprep

int main() {
  using vlnprep::Outcome;
  vlnprep::testing::TempDir dir;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 shuffle suite", vlnprep::ShuffleSuite},
      {"2 mismatch suite", vlnprep::MismatchSuite},
      {"3 unigram+object suite", [&] { return vlnprep::UoSuite(dir); }},
      {"4 metrics oracle", vlnprep::MetricsOracle},
      {"5 success rate agreement", vlnprep::SraSuite},
      {"6 cartography oracle", vlnprep::CartographyOracle},
      {"7 determinism", [&] { return vlnprep::Determinism(dir); }},
      {"8 end-to-end demo", [&] { return vlnprep::EndToEnd(dir); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
