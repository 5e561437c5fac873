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

// End-to-end pipeline and report serialization.
//
// Reports are canonical JSON: keys sorted, every floating point number
// printed with six decimals, a schemaVersion field at the top level.

#ifndef ADLENS_REPORT_H_
#define ADLENS_REPORT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "adlens/activity_extractor.h"
#include "adlens/common.h"
#include "adlens/dependency_graph.h"
#include "adlens/filter_engine.h"
#include "adlens/metrics.h"
#include "adlens/resource_mapper.h"
#include "adlens/trace_ingest.h"
#include "json.hpp"

namespace adlens {

inline constexpr char kReportSchemaVersion[] = "1.0";

struct AnalyzeOptions {
  NetworkTimeMode network_time = NetworkTimeMode::kSum;
  // Defaults to StageMap::Default().
  const StageMap* stage_map = nullptr;
};

struct PageReport {
  std::string page_url;
  CrawlMode crawl_mode = CrawlMode::kLanding;
  int repeat_index = 0;
  NetworkTimeMode network_time = NetworkTimeMode::kSum;

  double computation_fraction = 0;
  double network_fraction = 0;
  bool network_fraction_undefined = false;
  double unattributed_fraction = 0;

  int64_t activity_count = 0;
  int64_t request_count = 0;
  int64_t resource_count = 0;
  int64_t ad_resource_count = 0;

  StageMetrics stages;
  ContentTypeMetrics content_types;
  std::map<std::string, DomainTimes> ad_domains;
  ChainDepthStats chain_depth;
  int64_t domain_nodes = 0;
  int64_t ad_domain_nodes = 0;

  Warnings warnings;
};

// Everything the pipeline derived from one bundle.
struct Analysis {
  Extraction extraction;
  CallForest forest;
  std::vector<AttributedActivity> attributed;
  std::vector<ResourceRecord> resources;
  ResourceTree tree;
  PageReport report;
};

// Network records plus one synthetic record (no network time) for every
// attributed URL that never appeared in the network log, e.g. inline
// documents.
std::vector<ResourceRecord> ClassifyAllResources(
    const Bundle& bundle, const std::vector<AttributedActivity>& attributed,
    const RuleSet& rules);

// ingest -> extract -> map -> classify -> metrics. Fails when the bundle has
// no computation time.
absl::StatusOr<Analysis> AnalyzeBundle(const Bundle& bundle,
                                       const RuleSet& rules,
                                       const AnalyzeOptions& options = {});

// Loads, validates and analyzes a bundle directory.
absl::StatusOr<Analysis> AnalyzeDir(const std::filesystem::path& dir,
                                    const RuleSet& rules,
                                    const AnalyzeOptions& options = {});

struct PageSummary {
  std::string page_url;
  CrawlMode crawl_mode = CrawlMode::kLanding;
  int repeats = 0;
  double computation_fraction = 0;  // Median over repeats.
  double network_fraction = 0;
  double unattributed_fraction = 0;
};

struct ModeSummary {
  std::vector<PageSummary> pages;  // Sorted by page URL.
  std::vector<CdfPoint> computation_cdf;
  std::vector<CdfPoint> network_cdf;
  StageMetrics stages;  // Summed over valid bundles.
  ContentTypeMetrics content_types;
};

struct CorpusOptions {
  AnalyzeOptions analyze;
  // 0 means ADLENS_WORKERS or, failing that, the hardware concurrency.
  int workers = 0;
  WotBands wot_bands;
};

struct CorpusReport {
  int64_t bundles_total = 0;
  int64_t bundles_valid = 0;
  std::map<CrawlMode, ModeSummary> modes;
  std::vector<DomainCost> domains;
  ScoreTables scores;
  WotBands wot_bands;
  Warnings warnings;
};

// Bundle directories under `root` (any directory holding meta.json), sorted.
std::vector<std::filesystem::path> FindBundles(
    const std::filesystem::path& root);

// Worker count: `requested` when positive, else ADLENS_WORKERS, else the
// hardware concurrency. Never below 1.
int ResolveWorkers(int requested);

absl::StatusOr<CorpusReport> RunCorpus(const std::filesystem::path& root,
                                       const RuleSet& rules,
                                       const ScoreTables& scores,
                                       const CorpusOptions& options = {});

nlohmann::json PageReportJson(const PageReport& report);
nlohmann::json CorpusReportJson(const CorpusReport& report);

// Canonical text: sorted keys, two-space indent, doubles as %.6f.
std::string CanonicalJson(const nlohmann::json& value);

std::string RenderPageReport(const PageReport& report);
std::string RenderCorpusReport(const CorpusReport& report);

// CSV side outputs. Returns file name -> contents.
std::map<std::string, std::string> PageCsvTables(const PageReport& report);
std::map<std::string, std::string> CorpusCsvTables(const CorpusReport& report);

}  // namespace adlens

#endif  // ADLENS_REPORT_H_
