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

#include "vlnprep/cli.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "vlnprep/cartography.h"
#include "vlnprep/corpus.h"
#include "vlnprep/envgraph.h"
#include "vlnprep/error.h"
#include "vlnprep/metrics.h"
#include "vlnprep/noising.h"
#include "vlnprep/uogen.h"

namespace vlnprep {
namespace {

using nlohmann::ordered_json;

constexpr std::string_view kGrammar =
    "usage:\n"
    "  vlnprep noise --mode {sf-word|sf-sent|sf-word-sent|sf-all} --seed N IN -o OUT\n"
    "  vlnprep mismatch --mode {block|random} --seed N IN -o OUT\n"
    "  vlnprep empty-lang --keep F --seed N IN -o OUT\n"
    "  vlnprep subsample --n K --seed N IN -o OUT\n"
    "  vlnprep uo train --dataset IN [--labels FILE] -o MODEL\n"
    "  vlnprep uo generate --dataset IN [--detections FILE] --model MODEL\n"
    "                      --per-traj K [--mix MISMATCH_SRC] [--shuffle-objects]\n"
    "                      [--no-detector] [-a A] [-b B] [-k K] --seed N -o OUT\n"
    "  vlnprep eval --graphs DIR --episodes FILE --dataset FILE [--threshold 3.0]\n"
    "               [--bin-width 10] [--csv] -o REPORT\n"
    "  vlnprep eval delta --a R1 --b R2 -o MATRIX\n"
    "  vlnprep sra --a REPORT --b REPORT\n"
    "  vlnprep carto map --dynamics FILE -o POINTS\n"
    "  vlnprep carto classify --points FILE [--mu-threshold 0.5]\n"
    "                         [--sigma-quantile 0.5] -o POINTS\n"
    "  vlnprep carto select --points FILE --policy {random|cut_amb|top_amb|top_conf}\n"
    "                       --fraction F [--seed N] [-o MANIFEST]\n"
    "  vlnprep carto export --points FILE -o CSV [--svg SVG]\n"
    "  vlnprep --version\n";

std::string VersionLine() {
  return std::string(kToolName) + " " + std::string(kToolVersion) +
         " (dataset format " + std::to_string(kFormatVersion) +
         ", uo-model format " + std::to_string(kFormatVersion) +
         ", report format " + std::to_string(kFormatVersion) + ")";
}

void AttachManifest(Dataset& dataset, const RunManifest& manifest) {
  if (!dataset.metadata.is_object()) dataset.metadata = ordered_json::object();
  dataset.metadata["manifest"] = manifest.ToJson();
}

ordered_json Envelope(const RunManifest& manifest, const char* key,
                      ordered_json body) {
  ordered_json doc;
  doc["manifest"] = manifest.ToJson();
  doc[key] = std::move(body);
  return doc;
}

struct Options {
  // Shared dataset-transform flags.
  std::string input;
  std::string output;
  uint64_t seed = 0;
  std::string mode;
  double keep = 1.0;
  std::size_t n = 0;

  // uo
  std::string dataset;
  std::string labels;
  std::string detections;
  std::string model;
  std::size_t per_traj = 0;
  std::string mix;
  bool shuffle_objects = false;
  bool no_detector = false;
  UOConfig uo;

  // eval / sra
  std::string graphs;
  std::string episodes;
  double threshold = kDefaultSuccessThreshold;
  std::size_t bin_width = kDefaultLengthBinWidth;
  bool csv = false;
  std::string report_a;
  std::string report_b;

  // carto
  std::string dynamics;
  std::string points;
  double mu_threshold = 0.5;
  double sigma_quantile = 0.5;
  std::string policy;
  double fraction = 0.0;
  std::string svg;
};

void RequireSet(const CLI::App* app, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (app->count(name) == 0) {
      throw UsageError(app->get_name() + ": option " + name + " is required");
    }
  }
}

int RunNoise(const Options& o) {
  const ShuffleMode mode = ParseShuffleMode(o.mode);
  Dataset d = ShuffleDataset(LoadDataset(o.input), mode, o.seed);
  RunManifest m{"noise", {{"mode", o.mode}}, o.seed, ordered_json::object()};
  m.AddInput("dataset", o.input);
  AttachManifest(d, m);
  SaveDataset(d, o.output);
  return kExitOk;
}

int RunMismatch(const Options& o) {
  const MismatchMode mode = ParseMismatchMode(o.mode);
  Dataset d = Mismatch(LoadDataset(o.input), mode, o.seed);
  RunManifest m{"mismatch", {{"mode", o.mode}}, o.seed, ordered_json::object()};
  m.AddInput("dataset", o.input);
  AttachManifest(d, m);
  SaveDataset(d, o.output);
  return kExitOk;
}

int RunEmptyLang(const Options& o) {
  if (!(o.keep >= 0.0 && o.keep <= 1.0)) {
    throw UsageError("empty-lang: --keep must be in [0, 1]");
  }
  Dataset d = EmptyLanguage(LoadDataset(o.input), o.keep, o.seed);
  RunManifest m{"empty-lang", {{"keep", o.keep}}, o.seed, ordered_json::object()};
  m.AddInput("dataset", o.input);
  AttachManifest(d, m);
  SaveDataset(d, o.output);
  return kExitOk;
}

int RunSubsample(const Options& o) {
  Dataset d = Subsample(LoadDataset(o.input), o.n, o.seed);
  RunManifest m{"subsample", {{"n", o.n}}, o.seed, ordered_json::object()};
  m.AddInput("dataset", o.input);
  AttachManifest(d, m);
  SaveDataset(d, o.output);
  return kExitOk;
}

int RunUoTrain(const Options& o) {
  const Dataset d = LoadDataset(o.dataset);
  std::set<std::string> labels;
  RunManifest m{"uo train", ordered_json::object(), nullptr,
                ordered_json::object()};
  m.AddInput("dataset", o.dataset);
  if (!o.labels.empty()) {
    labels = LoadLabels(o.labels);
    m.AddInput("labels", o.labels);
  }
  const UnigramModel unigram = TrainUnigram(d, labels);
  const LengthDistribution lengths = FitLengthDistribution(d);
  ordered_json doc = ModelToJson(unigram, lengths);
  doc["manifest"] = m.ToJson();
  WriteJsonFile(doc, o.output);
  return kExitOk;
}

int RunUoGenerate(const Options& o) {
  UOConfig cfg = o.uo;
  cfg.shuffle_objects = o.shuffle_objects;
  cfg.no_detector = o.no_detector;
  if (!cfg.no_detector && o.detections.empty()) {
    throw UsageError("uo generate: --detections is required unless --no-detector");
  }
  RunManifest m{"uo generate",
                {{"per_traj", o.per_traj},
                 {"a", cfg.objects_per_window},
                 {"b", cfg.panoramas_per_window},
                 {"k", cfg.detections_per_panorama},
                 {"shuffle_objects", cfg.shuffle_objects},
                 {"no_detector", cfg.no_detector},
                 {"mix", !o.mix.empty()}},
                o.seed,
                ordered_json::object()};

  const Dataset d = LoadDataset(o.dataset);
  m.AddInput("dataset", o.dataset);
  DetectionSet detections;
  if (!o.detections.empty()) {
    detections = LoadDetections(o.detections);
    m.AddInput("detections", o.detections);
  }
  UnigramModel unigram;
  LengthDistribution lengths;
  ModelFromJson(ReadJsonFile(o.model), unigram, lengths);
  m.AddInput("model", o.model);
  std::optional<Dataset> donor;
  if (!o.mix.empty()) {
    donor = LoadDataset(o.mix);
    m.AddInput("mix", o.mix);
  }
  Dataset out = AnnotateDataset(d, detections, unigram, lengths, cfg,
                                o.per_traj, o.seed, donor ? &*donor : nullptr);
  AttachManifest(out, m);
  SaveDataset(out, o.output);
  return kExitOk;
}

int RunEval(const Options& o) {
  const auto graphs = LoadGraphs(o.graphs);
  const auto episodes = LoadEpisodes(o.episodes);
  const Dataset d = LoadDataset(o.dataset);
  const EvalReport report =
      Evaluate(graphs, episodes, &d, o.threshold, o.bin_width);
  if (o.csv) {
    WriteFile(o.output, ReportToCsv(report));
    return kExitOk;
  }
  RunManifest m{"eval",
                {{"threshold", o.threshold}, {"bin_width", o.bin_width}},
                nullptr,
                ordered_json::object()};
  m.AddInput("episodes", o.episodes);
  m.AddInput("dataset", o.dataset);
  ordered_json doc = ReportToJson(report);
  doc["manifest"] = m.ToJson();
  WriteJsonFile(doc, o.output);
  return kExitOk;
}

int RunEvalDelta(const Options& o) {
  const EvalReport a = ReportFromJson(ReadJsonFile(o.report_a));
  const EvalReport b = ReportFromJson(ReadJsonFile(o.report_b));
  RunManifest m{"eval delta", ordered_json::object(), nullptr,
                ordered_json::object()};
  m.AddInput("a", o.report_a);
  m.AddInput("b", o.report_b);
  WriteJsonFile(Envelope(m, "cells", DeltaToJson(DeltaSr(a, b))), o.output);
  return kExitOk;
}

int RunSra(const Options& o, std::ostream& out) {
  const EvalReport a = ReportFromJson(ReadJsonFile(o.report_a));
  const EvalReport b = ReportFromJson(ReadJsonFile(o.report_b));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", Sra(a, b));
  out << buf << "\n";
  return kExitOk;
}

int RunCartoMap(const Options& o) {
  const auto points = ComputeMap(LoadDynamics(o.dynamics));
  RunManifest m{"carto map", ordered_json::object(), nullptr,
                ordered_json::object()};
  m.AddInput("dynamics", o.dynamics);
  WriteJsonFile(Envelope(m, "points", PointsToJson(points)), o.output);
  return kExitOk;
}

std::vector<CartographyPoint> ReadPoints(const std::string& path) {
  try {
    return PointsFromJson(ReadJsonFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

int RunCartoClassify(const Options& o) {
  if (!(o.sigma_quantile >= 0.0 && o.sigma_quantile <= 1.0)) {
    throw UsageError("carto classify: --sigma-quantile must be in [0, 1]");
  }
  const auto points =
      ClassifyRegions(ReadPoints(o.points), o.mu_threshold, o.sigma_quantile);
  RunManifest m{"carto classify",
                {{"mu_threshold", o.mu_threshold},
                 {"sigma_quantile", o.sigma_quantile}},
                nullptr,
                ordered_json::object()};
  m.AddInput("points", o.points);
  WriteJsonFile(Envelope(m, "points", PointsToJson(points)), o.output);
  return kExitOk;
}

int RunCartoSelect(const Options& o, bool seed_given, std::ostream& out) {
  const SelectionPolicy policy = ParseSelectionPolicy(o.policy);
  if (policy == SelectionPolicy::kRandom && !seed_given) {
    throw UsageError("carto select: --seed is required for policy random");
  }
  if (!(o.fraction >= 0.0 && o.fraction <= 1.0)) {
    throw UsageError("carto select: --fraction must be in [0, 1]");
  }
  const auto points = ReadPoints(o.points);
  const auto ids = SelectSubset(points, policy, o.fraction, o.seed);
  const ordered_json seed =
      policy == SelectionPolicy::kRandom ? ordered_json(o.seed) : ordered_json();
  RunManifest m{"carto select",
                {{"policy", o.policy}, {"fraction", o.fraction}},
                seed,
                ordered_json::object()};
  m.AddInput("points", o.points);
  ordered_json doc;
  doc["provenance"] = {{"policy", o.policy},
                       {"fraction", o.fraction},
                       {"seed", seed},
                       {"total", points.size()},
                       {"selected", ids.size()}};
  doc["manifest"] = m.ToJson();
  doc["sample_ids"] = ids;
  if (o.output.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    WriteJsonFile(doc, o.output);
  }
  return kExitOk;
}

int RunCartoExport(const Options& o) {
  const auto points = ReadPoints(o.points);
  std::optional<std::filesystem::path> svg;
  if (!o.svg.empty()) svg = o.svg;
  ExportMap(points, o.output, svg);
  return kExitOk;
}

}  // namespace

std::string FileDigest(const std::filesystem::path& path) {
  const std::string bytes = ReadFile(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) !=
      1) {
    throw ValidationError("sha256 failed for '" + path.string() + "'");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "sha256:";
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

void RunManifest::AddInput(std::string_view role,
                           const std::filesystem::path& path) {
  inputs[std::string(role)] = FileDigest(path);
}

ordered_json RunManifest::ToJson() const {
  ordered_json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["format_version"] = kFormatVersion;
  doc["subcommand"] = subcommand;
  doc["flags"] = flags;
  doc["seed"] = seed;
  doc["inputs"] = inputs;
  return doc;
}

int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  Options o;
  CLI::App app{"Deterministic data tooling for vision-and-language navigation",
               std::string(kToolName)};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "Print tool and format versions");

  auto* noise = app.add_subcommand("noise", "Shuffle instruction words/sentences");
  noise->add_option("--mode", o.mode)->required();
  noise->add_option("--seed", o.seed)->required();
  noise->add_option("input", o.input)->required();
  noise->add_option("-o,--output", o.output)->required();

  auto* mismatch = app.add_subcommand("mismatch", "Reassign instructions");
  mismatch->add_option("--mode", o.mode)->required();
  mismatch->add_option("--seed", o.seed)->required();
  mismatch->add_option("input", o.input)->required();
  mismatch->add_option("-o,--output", o.output)->required();

  auto* empty = app.add_subcommand("empty-lang", "Blank out instruction text");
  empty->add_option("--keep", o.keep)->required();
  empty->add_option("--seed", o.seed)->required();
  empty->add_option("input", o.input)->required();
  empty->add_option("-o,--output", o.output)->required();

  auto* subsample = app.add_subcommand("subsample", "Uniform sample subset");
  subsample->add_option("--n", o.n)->required();
  subsample->add_option("--seed", o.seed)->required();
  subsample->add_option("input", o.input)->required();
  subsample->add_option("-o,--output", o.output)->required();

  auto* uo = app.add_subcommand("uo", "Unigram + Object instruction generation");
  uo->require_subcommand(1);
  auto* uo_train = uo->add_subcommand("train", "Fit unigram and length models");
  uo_train->add_option("--dataset", o.dataset)->required();
  uo_train->add_option("--labels", o.labels);
  uo_train->add_option("-o,--output", o.output)->required();
  auto* uo_gen = uo->add_subcommand("generate", "Generate instructions");
  uo_gen->add_option("--dataset", o.dataset)->required();
  uo_gen->add_option("--detections", o.detections);
  uo_gen->add_option("--model", o.model)->required();
  uo_gen->add_option("--per-traj", o.per_traj)->required();
  uo_gen->add_option("--mix", o.mix);
  uo_gen->add_flag("--shuffle-objects", o.shuffle_objects);
  uo_gen->add_flag("--no-detector", o.no_detector);
  uo_gen->add_option("-a", o.uo.objects_per_window, "Objects per window")
      ->check(CLI::PositiveNumber);
  uo_gen->add_option("-b", o.uo.panoramas_per_window, "Panoramas per window")
      ->check(CLI::PositiveNumber);
  uo_gen->add_option("-k", o.uo.detections_per_panorama,
                     "Detections per panorama")
      ->check(CLI::PositiveNumber);
  uo_gen->add_option("--seed", o.seed)->required();
  uo_gen->add_option("-o,--output", o.output)->required();

  auto* eval = app.add_subcommand("eval", "Navigation metrics");
  eval->require_subcommand(0, 1);
  eval->add_option("--graphs", o.graphs);
  eval->add_option("--episodes", o.episodes);
  eval->add_option("--dataset", o.dataset);
  eval->add_option("--threshold", o.threshold)->check(CLI::PositiveNumber);
  eval->add_option("--bin-width", o.bin_width)->check(CLI::PositiveNumber);
  eval->add_flag("--csv", o.csv);
  eval->add_option("-o,--output", o.output);
  auto* delta = eval->add_subcommand("delta", "Cell-wise SR difference");
  delta->add_option("--a", o.report_a)->required();
  delta->add_option("--b", o.report_b)->required();
  delta->add_option("-o,--output", o.output)->required();

  auto* sra = app.add_subcommand("sra", "Success rate agreement");
  sra->add_option("--a", o.report_a)->required();
  sra->add_option("--b", o.report_b)->required();

  auto* carto = app.add_subcommand("carto", "Training-dynamics data maps");
  carto->require_subcommand(1);
  auto* cmap = carto->add_subcommand("map", "Confidence and variability");
  cmap->add_option("--dynamics", o.dynamics)->required();
  cmap->add_option("-o,--output", o.output)->required();
  auto* cclass = carto->add_subcommand("classify", "Assign regions");
  cclass->add_option("--points", o.points)->required();
  cclass->add_option("--mu-threshold", o.mu_threshold);
  cclass->add_option("--sigma-quantile", o.sigma_quantile);
  cclass->add_option("-o,--output", o.output)->required();
  auto* csel = carto->add_subcommand("select", "Select a training subset");
  csel->add_option("--points", o.points)->required();
  csel->add_option("--policy", o.policy)->required();
  csel->add_option("--fraction", o.fraction)->required();
  auto* csel_seed = csel->add_option("--seed", o.seed);
  csel->add_option("-o,--output", o.output);
  auto* cexp = carto->add_subcommand("export", "CSV and SVG export");
  cexp->add_option("--points", o.points)->required();
  cexp->add_option("-o,--output", o.output)->required();
  cexp->add_option("--svg", o.svg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << kGrammar;
    return kExitUsage;
  }

  try {
    if (version) {
      out << VersionLine() << "\n";
      return kExitOk;
    }
    if (*noise) return RunNoise(o);
    if (*mismatch) return RunMismatch(o);
    if (*empty) return RunEmptyLang(o);
    if (*subsample) return RunSubsample(o);
    if (*uo_train) return RunUoTrain(o);
    if (*uo_gen) return RunUoGenerate(o);
    if (*delta) return RunEvalDelta(o);
    if (*eval) {
      RequireSet(eval, {"--graphs", "--episodes", "--dataset", "--output"});
      return RunEval(o);
    }
    if (*sra) return RunSra(o, out);
    if (*cmap) return RunCartoMap(o);
    if (*cclass) return RunCartoClassify(o);
    if (*csel) return RunCartoSelect(o, csel_seed->count() > 0, out);
    if (*cexp) return RunCartoExport(o);
    err << "error: no subcommand given\n" << kGrammar;
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << kGrammar;
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace vlnprep
