// Copyright 2026 The adlens Authors. All Rights Reserved.
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

// adlens command line: analyze, corpus, graph, validate, timeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "adlens/activity_extractor.h"
#include "adlens/dependency_graph.h"
#include "adlens/filter_engine.h"
#include "adlens/metrics.h"
#include "adlens/report.h"
#include "adlens/resource_mapper.h"
#include "adlens/trace_ingest.h"

namespace fs = std::filesystem;

namespace adlens {
namespace {

int Fail(const absl::Status& status) {
  std::cerr << "adlens: " << status.message() << "\n";
  return 1;
}

absl::Status WriteText(const fs::path& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return absl::OkStatus();
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    return absl::InternalError("cannot write " + path.string());
  }
  return absl::OkStatus();
}

absl::Status WriteTables(const fs::path& dir,
                         const std::map<std::string, std::string>& tables) {
  for (const auto& [name, text] : tables) {
    if (absl::Status s = WriteText(dir / name, text); !s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::StatusOr<RuleSet> LoadRules(const std::vector<std::string>& paths) {
  RuleSet rules;
  for (const std::string& p : paths) {
    absl::StatusOr<std::string> text = ReadFile(p);
    if (!text.ok()) return text.status();
    rules.Append(*text);
  }
  return rules;
}

struct CommonFlags {
  std::vector<std::string> filters;
  std::string stage_map;
  std::string network_time = "sum";
};

absl::StatusOr<AnalyzeOptions> MakeOptions(const CommonFlags& flags,
                                           std::optional<StageMap>* storage) {
  AnalyzeOptions options;
  std::optional<NetworkTimeMode> mode =
      NetworkTimeModeFromName(flags.network_time);
  if (!mode) {
    return absl::InvalidArgumentError("--network-time must be sum|wallclock");
  }
  options.network_time = *mode;
  if (!flags.stage_map.empty()) {
    absl::StatusOr<std::string> text = ReadFile(flags.stage_map);
    if (!text.ok()) return text.status();
    absl::StatusOr<StageMap> map = StageMap::Parse(*text);
    if (!map.ok()) return map.status();
    *storage = std::move(*map);
    options.stage_map = &**storage;
  }
  return options;
}

void AddCommon(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--filters", flags->filters,
                  "Adblock-syntax filter list (repeatable)")
      ->required();
  cmd->add_option("--stage-map", flags->stage_map,
                  "Event name to stage table replacing the default");
  cmd->add_option("--network-time", flags->network_time,
                  "Network time reducer: sum or wallclock");
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"adlens: attribute page-load cost to ad and non-ad resources"};
  app.require_subcommand(1);

  CommonFlags analyze_flags;
  std::string analyze_bundle, analyze_out = "-", analyze_csv;
  CLI::App* analyze =
      app.add_subcommand("analyze", "Report the ad cost of one bundle");
  analyze->add_option("--bundle", analyze_bundle, "Bundle directory")
      ->required();
  AddCommon(analyze, &analyze_flags);
  analyze->add_option("--out", analyze_out, "Report path, - for stdout");
  analyze->add_option("--csv-dir", analyze_csv, "Also write CSV tables here");

  CommonFlags corpus_flags;
  std::string corpus_root, corpus_out = "-", corpus_csv, wot, vt, ranks;
  int workers = 0;
  WotBands bands;
  CLI::App* corpus =
      app.add_subcommand("corpus", "Aggregate every bundle under a root");
  corpus->add_option("--root", corpus_root, "Corpus directory")->required();
  AddCommon(corpus, &corpus_flags);
  corpus->add_option("--wot", wot, "CSV: domain,score (0-100)");
  corpus->add_option("--vt", vt, "CSV: domain,safeFlags,totalFlags");
  corpus->add_option("--ranks", ranks, "CSV: domain,rank");
  corpus->add_option("--workers", workers,
                     "Worker threads (ADLENS_WORKERS caps this)");
  corpus->add_option("--wot-unsatisfactory", bands.unsatisfactory,
                     "Lower bound of the unsatisfactory WOT rating");
  corpus->add_option("--wot-poor", bands.poor,
                     "Lower bound of the poor WOT rating");
  corpus->add_option("--out", corpus_out, "Report path, - for stdout");
  corpus->add_option("--csv-dir", corpus_csv,
                     "Also write CSV tables and CDF series here");

  std::vector<std::string> graph_filters;
  std::string graph_bundle, graph_format = "dot", graph_out = "-";
  CLI::App* graph =
      app.add_subcommand("graph", "Export the domain dependency graph");
  graph->add_option("--bundle", graph_bundle, "Bundle directory")->required();
  graph->add_option("--filters", graph_filters, "Filter list (repeatable)")
      ->required();
  graph->add_option("--format", graph_format, "dot or json")
      ->check(CLI::IsMember({"dot", "json"}));
  graph->add_option("--out", graph_out, "Output path, - for stdout");

  std::string validate_bundle;
  CLI::App* validate =
      app.add_subcommand("validate", "Check a bundle and print a summary");
  validate->add_option("--bundle", validate_bundle, "Bundle directory")
      ->required();

  CommonFlags timeline_flags;
  std::string timeline_bundle;
  CLI::App* timeline = app.add_subcommand(
      "timeline", "Print per-thread call stacks with their attribution");
  timeline->add_option("--bundle", timeline_bundle, "Bundle directory")
      ->required();
  AddCommon(timeline, &timeline_flags);

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed() || timeline->parsed()) {
    const CommonFlags& flags =
        analyze->parsed() ? analyze_flags : timeline_flags;
    std::optional<StageMap> map;
    absl::StatusOr<AnalyzeOptions> options = MakeOptions(flags, &map);
    if (!options.ok()) return Fail(options.status());
    absl::StatusOr<RuleSet> rules = LoadRules(flags.filters);
    if (!rules.ok()) return Fail(rules.status());
    absl::StatusOr<Analysis> a = AnalyzeDir(
        analyze->parsed() ? analyze_bundle : timeline_bundle, *rules, *options);
    if (!a.ok()) return Fail(a.status());
    if (timeline->parsed()) {
      std::cout << DumpStackTimeline(a->attributed, a->forest);
      return 0;
    }
    if (absl::Status s = WriteText(analyze_out, RenderPageReport(a->report));
        !s.ok()) {
      return Fail(s);
    }
    if (!analyze_csv.empty()) {
      if (absl::Status s = WriteTables(analyze_csv, PageCsvTables(a->report));
          !s.ok()) {
        return Fail(s);
      }
    }
    return 0;
  }

  if (corpus->parsed()) {
    std::optional<StageMap> map;
    absl::StatusOr<AnalyzeOptions> analyze_options =
        MakeOptions(corpus_flags, &map);
    if (!analyze_options.ok()) return Fail(analyze_options.status());
    absl::StatusOr<RuleSet> rules = LoadRules(corpus_flags.filters);
    if (!rules.ok()) return Fail(rules.status());

    ScoreTables scores;
    if (!wot.empty()) {
      absl::StatusOr<std::string> text = ReadFile(wot);
      if (!text.ok()) return Fail(text.status());
      auto parsed = ParseWotCsv(*text);
      if (!parsed.ok()) return Fail(parsed.status());
      scores.wot = std::move(*parsed);
    }
    if (!vt.empty()) {
      absl::StatusOr<std::string> text = ReadFile(vt);
      if (!text.ok()) return Fail(text.status());
      auto parsed = ParseVtCsv(*text);
      if (!parsed.ok()) return Fail(parsed.status());
      scores.vt = std::move(*parsed);
    }
    if (!ranks.empty()) {
      absl::StatusOr<std::string> text = ReadFile(ranks);
      if (!text.ok()) return Fail(text.status());
      auto parsed = ParseRanksCsv(*text);
      if (!parsed.ok()) return Fail(parsed.status());
      scores.ranks = std::move(*parsed);
    }

    CorpusOptions options;
    options.analyze = *analyze_options;
    options.workers = workers;
    options.wot_bands = bands;
    absl::StatusOr<CorpusReport> report =
        RunCorpus(corpus_root, *rules, scores, options);
    if (!report.ok()) return Fail(report.status());
    if (absl::Status s = WriteText(corpus_out, RenderCorpusReport(*report));
        !s.ok()) {
      return Fail(s);
    }
    if (!corpus_csv.empty()) {
      if (absl::Status s = WriteTables(corpus_csv, CorpusCsvTables(*report));
          !s.ok()) {
        return Fail(s);
      }
    }
    return 0;
  }

  if (graph->parsed()) {
    absl::StatusOr<RuleSet> rules = LoadRules(graph_filters);
    if (!rules.ok()) return Fail(rules.status());
    absl::StatusOr<Bundle> bundle = LoadBundle(graph_bundle);
    if (!bundle.ok()) return Fail(bundle.status());
    Warnings warnings;
    std::vector<ResourceRecord> resources =
        ClassifyResources(bundle->requests, *rules, bundle->meta.page_url);
    ResourceTree tree =
        BuildGraph(bundle->deps, resources, bundle->meta.page_url, &warnings);
    GraphFormat format =
        graph_format == "json" ? GraphFormat::kJson : GraphFormat::kDot;
    if (absl::Status s =
            WriteText(graph_out, ExportGraph(CollapseByDomain(tree), format));
        !s.ok()) {
      return Fail(s);
    }
    for (const auto& [code, n] : warnings.counts()) {
      std::cerr << "warning " << code << " " << n << "\n";
    }
    return 0;
  }

  if (validate->parsed()) {
    absl::StatusOr<Bundle> bundle = LoadBundle(validate_bundle);
    if (!bundle.ok()) return Fail(bundle.status());
    absl::StatusOr<BundleSummary> summary =
        ValidateBundle(bundle->events, bundle->requests, bundle->deps);
    if (!summary.ok()) return Fail(summary.status());
    nlohmann::json out = {
        {"pageUrl", bundle->meta.page_url},
        {"crawlMode", std::string(CrawlModeName(bundle->meta.crawl_mode))},
        {"events", summary->event_count},
        {"requests", summary->request_count},
        {"edges", summary->edge_count},
        {"clocksOverlap", summary->clocks_overlap},
        {"orphanEdges", summary->orphan_edges.size()},
        {"warnings", nlohmann::json::object()}};
    for (const auto& [code, n] : bundle->warnings.counts()) {
      out["warnings"][code] = n;
    }
    std::cout << CanonicalJson(out);
    return summary->clocks_overlap ? 0 : 2;
  }
  return 0;
}

}  // namespace adlens

int main(int argc, char** argv) { return adlens::Main(argc, argv); }
