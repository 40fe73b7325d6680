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

#include "vlnprep/uogen.h"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>
#include <utility>

#include "vlnprep/error.h"
#include "vlnprep/noising.h"
#include "vlnprep/parallel.h"

namespace vlnprep {
namespace {

using nlohmann::ordered_json;

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> SplitWords(std::string_view label) {
  std::vector<std::string> words;
  std::istringstream in{std::string(label)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::size_t CumulativeDraw(const std::vector<uint64_t>& cumulative,
                           uint64_t total, Rng& rng) {
  const uint64_t r = rng.Uniform(total);
  return static_cast<std::size_t>(
      std::upper_bound(cumulative.begin(), cumulative.end(), r) -
      cumulative.begin());
}

}  // namespace

UnigramModel::UnigramModel(std::map<std::string, uint64_t> counts,
                           std::set<std::string> excluded)
    : counts_(std::move(counts)), excluded_(std::move(excluded)) {
  for (const auto& [token, count] : counts_) {
    if (count == 0) {
      throw ValidationError("unigram token '" + token + "' has zero count");
    }
    if (excluded_.contains(AsciiLower(token))) {
      throw ValidationError("unigram token '" + token + "' is excluded");
    }
    total_ += count;
    tokens_.push_back(token);
    cumulative_.push_back(total_);
  }
}

const std::string& UnigramModel::Sample(Rng& rng) const {
  if (empty()) throw ValidationError("sampling from an empty unigram model");
  return tokens_[CumulativeDraw(cumulative_, total_, rng)];
}

LengthDistribution::LengthDistribution(
    std::map<std::size_t, uint64_t> histogram)
    : histogram_(std::move(histogram)) {
  for (const auto& [length, count] : histogram_) {
    if (length == 0) throw ValidationError("instruction length 0 in histogram");
    if (count == 0) throw ValidationError("zero count in length histogram");
    total_ += count;
  }
}

double LengthDistribution::Probability(std::size_t length) const {
  auto it = histogram_.find(length);
  if (it == histogram_.end() || total_ == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total_);
}

std::size_t LengthDistribution::Sample(Rng& rng) const {
  if (total_ == 0) throw ValidationError("sampling from an empty length model");
  const uint64_t r = rng.Uniform(total_);
  uint64_t cumulative = 0;
  for (const auto& [length, count] : histogram_) {
    cumulative += count;
    if (r < cumulative) return length;
  }
  return histogram_.rbegin()->first;
}

void ValidateConfig(const UOConfig& config) {
  if (config.objects_per_window == 0 || config.panoramas_per_window == 0 ||
      config.detections_per_panorama == 0) {
    throw ValidationError("UO config: a, b and k must all be >= 1");
  }
}

UnigramModel TrainUnigram(const Dataset& dataset,
                          const std::set<std::string>& object_labels) {
  std::set<std::string> excluded;
  for (const auto& label : object_labels) {
    for (const auto& word : SplitWords(label)) excluded.insert(AsciiLower(word));
  }
  std::map<std::string, uint64_t> counts;
  for (const auto& sample : dataset.samples) {
    for (const auto& ins : sample.instructions) {
      for (const auto& sentence : Tokenize(ins.text, ins.language).sentences) {
        for (const auto& token : sentence) {
          if (IsPunctuation(token) || excluded.contains(AsciiLower(token))) {
            continue;
          }
          ++counts[token];
        }
      }
    }
  }
  if (counts.empty()) throw ValidationError("empty unigram support");
  return UnigramModel(std::move(counts), std::move(excluded));
}

LengthDistribution FitLengthDistribution(const Dataset& dataset) {
  std::map<std::size_t, uint64_t> histogram;
  for (const auto& sample : dataset.samples) {
    for (const auto& ins : sample.instructions) {
      const std::size_t words = WordCount(Tokenize(ins.text, ins.language));
      if (words > 0) ++histogram[words];
    }
  }
  if (histogram.empty()) {
    throw ValidationError("length distribution needs a nonempty instruction");
  }
  return LengthDistribution(std::move(histogram));
}

GenerationTrace TraceGeneration(const Sample& sample,
                                const TrajectoryDetections* detections,
                                const UnigramModel& unigram,
                                const LengthDistribution& lengths,
                                const UOConfig& config, uint64_t seed) {
  ValidateConfig(config);
  if (unigram.empty()) throw ValidationError("empty unigram model");
  Rng rng(seed);
  GenerationTrace trace;
  trace.target_length = lengths.Sample(rng);

  if (config.no_detector) {
    if (!unigram.excluded().empty()) {
      throw ValidationError(
          "path_id '" + sample.path_id +
          "': no-detector generation needs a unigram model trained without "
          "label exclusion");
    }
    GenerationTrace::Window window;
    for (std::size_t i = 0; i < trace.target_length; ++i) {
      window.fillers.push_back(unigram.Sample(rng));
    }
    Sentence sentence = window.fillers;
    sentence.push_back(".");
    trace.tokens.sentences.push_back(std::move(sentence));
    trace.windows.push_back(std::move(window));
  } else {
    const std::size_t L = sample.path.size();
    if (detections == nullptr || detections->size() != L) {
      throw ValidationError(
          "path_id '" + sample.path_id + "': detections cover " +
          std::to_string(detections ? detections->size() : 0) +
          " panoramas, trajectory has " + std::to_string(L));
    }
    const std::size_t b = config.panoramas_per_window;
    const std::size_t window_count = (L + b - 1) / b;
    std::size_t pooled = 0;
    for (std::size_t w = 0; w < window_count; ++w) {
      GenerationTrace::Window window;
      for (std::size_t p = w * b; p < std::min(L, (w + 1) * b); ++p) {
        const auto& pano = (*detections)[p];
        const std::size_t top =
            std::min(pano.size(), config.detections_per_panorama);
        for (std::size_t r = 0; r < top; ++r) window.pool.push_back(pano[r].label);
      }
      std::vector<std::size_t> picks(window.pool.size());
      std::iota(picks.begin(), picks.end(), 0);
      const std::size_t take =
          std::min(config.objects_per_window, window.pool.size());
      rng.ShufflePrefix(std::span<std::size_t>(picks), take);
      picks.resize(take);
      std::sort(picks.begin(), picks.end());
      window.selected = std::move(picks);
      for (std::size_t idx : window.selected) {
        trace.object_words += SplitWords(window.pool[idx]).size();
      }
      pooled += window.pool.size();
      trace.windows.push_back(std::move(window));
    }
    if (pooled == 0) {
      throw ValidationError("path_id '" + sample.path_id +
                            "': every detection pool is empty");
    }

    const std::size_t filler_total =
        trace.object_words < trace.target_length
            ? trace.target_length - trace.object_words
            : 0;
    const std::size_t base = filler_total / window_count;
    const std::size_t extra = filler_total % window_count;
    for (std::size_t w = 0; w < window_count; ++w) {
      auto& window = trace.windows[w];
      const std::size_t count = base + (w < extra ? 1 : 0);
      for (std::size_t i = 0; i < count; ++i) {
        window.fillers.push_back(unigram.Sample(rng));
      }
      Sentence sentence = window.fillers;
      for (std::size_t idx : window.selected) {
        for (auto& word : SplitWords(window.pool[idx])) {
          sentence.push_back(std::move(word));
        }
      }
      sentence.push_back(".");
      trace.tokens.sentences.push_back(std::move(sentence));
    }
  }

  if (config.shuffle_objects) {
    trace.tokens = ShuffleInstruction(trace.tokens, ShuffleMode::kAll, rng.Next());
  }
  return trace;
}

Instruction GenerateInstruction(const Sample& sample,
                                const TrajectoryDetections* detections,
                                const UnigramModel& unigram,
                                const LengthDistribution& lengths,
                                const UOConfig& config, uint64_t seed) {
  const GenerationTrace trace =
      TraceGeneration(sample, detections, unigram, lengths, config, seed);
  return Instruction{Detokenize(trace.tokens), Language::kEnUs, "uo"};
}

Dataset AnnotateDataset(const Dataset& dataset, const DetectionSet& detections,
                        const UnigramModel& unigram,
                        const LengthDistribution& lengths,
                        const UOConfig& config, std::size_t per_traj,
                        uint64_t seed, const Dataset* mismatch_donor) {
  ValidateConfig(config);
  if (!config.no_detector) {
    for (const auto& s : dataset.samples) {
      if (!detections.contains(s.path_id)) {
        throw ValidationError("missing detections for path_id '" + s.path_id +
                              "'");
      }
    }
  }

  Dataset out = dataset;
  ParallelFor(out.samples.size(), [&](std::size_t i) {
    Sample& s = out.samples[i];
    const TrajectoryDetections* det = nullptr;
    if (auto it = detections.find(s.path_id); it != detections.end()) {
      det = &it->second;
    }
    std::vector<Instruction> generated;
    generated.reserve(per_traj);
    for (std::size_t j = 0; j < per_traj; ++j) {
      generated.push_back(GenerateInstruction(
          s, det, unigram, lengths, config, DeriveSeed(seed, s.path_id, j)));
    }
    s.instructions = std::move(generated);
  });

  ordered_json params = {{"per_traj", per_traj},
                         {"seed", seed},
                         {"a", config.objects_per_window},
                         {"b", config.panoramas_per_window},
                         {"k", config.detections_per_panorama},
                         {"shuffle_objects", config.shuffle_objects},
                         {"no_detector", config.no_detector}};

  if (mismatch_donor != nullptr && per_traj > 0 && !out.samples.empty()) {
    std::vector<Instruction> pool;
    for (const auto& s : mismatch_donor->samples) {
      pool.insert(pool.end(), s.instructions.begin(), s.instructions.end());
    }
    if (pool.empty()) {
      throw ValidationError("mismatch donor dataset has no instructions");
    }
    Rng rng(DeriveSeed(seed, 0x6D69786D69736DULL));
    std::vector<std::size_t> order(pool.size());
    std::size_t cursor = order.size();
    for (auto& s : out.samples) {
      for (std::size_t j = 0; j < per_traj; ++j) {
        if (cursor == order.size()) {
          std::iota(order.begin(), order.end(), 0);
          rng.Shuffle(std::span<std::size_t>(order));
          cursor = 0;
        }
        Instruction ins = pool[order[cursor++]];
        ins.source = "mismatch";
        s.instructions.push_back(std::move(ins));
      }
    }
    params["mix"] = "mismatch-random";
  }
  out.RecordTransform("uo-generate", std::move(params));
  return out;
}

DetectionSet ParseDetections(const ordered_json& document) {
  if (!document.is_object()) {
    throw ValidationError("detections file must map path_id to panoramas");
  }
  DetectionSet out;
  for (const auto& [path_id, panoramas] : document.items()) {
    auto fail = [&](const std::string& what) {
      throw ValidationError("detections for path_id '" + path_id + "': " + what);
    };
    if (!panoramas.is_array()) fail("not an array of panoramas");
    TrajectoryDetections trajectory;
    for (std::size_t p = 0; p < panoramas.size(); ++p) {
      const auto& pano = panoramas[p];
      if (!pano.is_array()) fail("panorama " + std::to_string(p) + " not an array");
      PanoramaDetections list;
      for (const auto& det : pano) {
        auto label = det.find("label");
        auto score = det.find("score");
        if (!det.is_object() || label == det.end() || !label->is_string() ||
            score == det.end() || !score->is_number()) {
          fail("panorama " + std::to_string(p) +
               " entry needs string 'label' and numeric 'score'");
        }
        if (!list.empty() && score->get<double>() > list.back().score) {
          fail("panorama " + std::to_string(p) +
               " is not sorted by descending score");
        }
        list.push_back({label->get<std::string>(), score->get<double>()});
      }
      trajectory.push_back(std::move(list));
    }
    out.emplace(path_id, std::move(trajectory));
  }
  return out;
}

DetectionSet LoadDetections(const std::filesystem::path& path) {
  try {
    return ParseDetections(ReadJsonFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::set<std::string> LoadLabels(const std::filesystem::path& path) {
  const std::string contents = ReadFile(path);
  std::set<std::string> labels;
  const auto first = contents.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && contents[first] == '[') {
    const ordered_json doc = ReadJsonFile(path);
    for (const auto& v : doc) {
      if (!v.is_string()) {
        throw ValidationError(path.string() + ": labels must be strings");
      }
      labels.insert(v.get<std::string>());
    }
    return labels;
  }
  std::istringstream in(contents);
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    labels.insert(line.substr(b, e - b + 1));
  }
  return labels;
}

ordered_json ModelToJson(const UnigramModel& unigram,
                         const LengthDistribution& lengths) {
  ordered_json counts = ordered_json::object();
  for (const auto& [token, count] : unigram.counts()) counts[token] = count;
  ordered_json histogram = ordered_json::object();
  for (const auto& [length, count] : lengths.histogram()) {
    histogram[std::to_string(length)] = count;
  }
  ordered_json doc;
  doc["format"] = "vlnprep.uo-model/1";
  doc["unigram"] = {{"counts", std::move(counts)},
                    {"total", unigram.total()},
                    {"excluded", unigram.excluded()}};
  doc["lengths"] = {{"histogram", std::move(histogram)}};
  return doc;
}

void ModelFromJson(const ordered_json& document, UnigramModel& unigram,
                   LengthDistribution& lengths) {
  try {
    const auto& u = document.at("unigram");
    std::map<std::string, uint64_t> counts;
    for (const auto& [token, count] : u.at("counts").items()) {
      counts[token] = count.get<uint64_t>();
    }
    std::set<std::string> excluded;
    for (const auto& v : u.at("excluded")) excluded.insert(v.get<std::string>());
    UnigramModel model(std::move(counts), std::move(excluded));
    if (auto total = u.find("total");
        total != u.end() && total->get<uint64_t>() != model.total()) {
      throw ValidationError("unigram 'total' does not match the counts");
    }
    std::map<std::size_t, uint64_t> histogram;
    for (const auto& [length, count] :
         document.at("lengths").at("histogram").items()) {
      histogram[std::stoul(length)] = count.get<uint64_t>();
    }
    unigram = std::move(model);
    lengths = LengthDistribution(std::move(histogram));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed UO model: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ValidationError(std::string("malformed UO model: ") + e.what());
  }
}

}  // namespace vlnprep
