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

#include "adlens/report.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <unordered_set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "adlens/strings.h"
#include "adlens/url.h"

namespace adlens {

using json = nlohmann::json;

std::vector<ResourceRecord> ClassifyAllResources(
    const Bundle& bundle, const std::vector<AttributedActivity>& attributed,
    const RuleSet& rules) {
  const std::string& page_url = bundle.meta.page_url;
  std::vector<ResourceRecord> out =
      ClassifyResources(bundle.requests, rules, page_url);
  std::unordered_set<std::string> known;
  for (const ResourceRecord& r : out) known.insert(r.url);
  for (const AttributedActivity& rec : attributed) {
    if (!rec.resource || !known.insert(*rec.resource).second) continue;
    ResourceRecord r;
    r.url = *rec.resource;
    r.domain = RegistrableDomainOfUrl(r.url);
    r.content_type =
        r.url == page_url ? ContentType::kHtml : ContentType::kUnknown;
    MatchResult match =
        rules.Match(MakeMatchContext(r.url, r.content_type, page_url));
    r.is_ad = match.is_ad;
    r.matched_rule = match.is_ad ? match.matched_rule : std::nullopt;
    r.from_network = false;
    out.push_back(std::move(r));
  }
  return out;
}

absl::StatusOr<Analysis> AnalyzeBundle(const Bundle& bundle,
                                       const RuleSet& rules,
                                       const AnalyzeOptions& options) {
  absl::StatusOr<BundleSummary> summary =
      ValidateBundle(bundle.events, bundle.requests, bundle.deps);
  if (!summary.ok()) return summary.status();

  Analysis a;
  PageReport& rep = a.report;
  rep.warnings = bundle.warnings;
  if (!summary->clocks_overlap) rep.warnings.Add("bundle.clock_mismatch");
  if (!summary->orphan_edges.empty()) {
    rep.warnings.Add("bundle.orphan_edges",
                     static_cast<int64_t>(summary->orphan_edges.size()));
  }

  const StageMap& map =
      options.stage_map ? *options.stage_map : StageMap::Default();
  a.extraction = ExtractActivities(bundle.events, map, &rep.warnings);
  a.forest = BuildCallStacks(&a.extraction.activities, &rep.warnings);
  a.attributed = AttributeAll(a.extraction.activities, a.extraction.markers,
                              a.forest, &rep.warnings);
  a.resources = ClassifyAllResources(bundle, a.attributed, rules);
  ResourceIndex index(a.resources);

  absl::StatusOr<double> comp = ComputationCostFraction(a.attributed, index);
  if (!comp.ok()) {
    return absl::FailedPreconditionError(
        absl::StrCat(bundle.dir.string(), ": ", comp.status().message()));
  }

  rep.page_url = bundle.meta.page_url;
  rep.crawl_mode = bundle.meta.crawl_mode;
  rep.repeat_index = bundle.meta.repeat_index;
  rep.network_time = options.network_time;
  rep.computation_fraction = *comp;
  rep.stages = ComputeStageMetrics(a.attributed, index);
  rep.unattributed_fraction =
      static_cast<double>(rep.stages.unattributed_total()) /
      static_cast<double>(rep.stages.grand_total());

  absl::StatusOr<double> net =
      NetworkCostFraction(a.resources, options.network_time);
  if (net.ok()) {
    rep.network_fraction = *net;
  } else {
    rep.network_fraction_undefined = true;
    rep.warnings.Add("metrics.zero_network_time");
  }
  rep.content_types =
      ComputeContentTypeTable(a.resources, options.network_time);
  rep.ad_domains =
      AdCostByDomain(a.attributed, a.resources, options.network_time);

  rep.activity_count = static_cast<int64_t>(a.extraction.activities.size());
  rep.request_count = static_cast<int64_t>(bundle.requests.size());
  for (const ResourceRecord& r : a.resources) {
    ++rep.resource_count;
    if (r.is_ad) ++rep.ad_resource_count;
  }

  a.tree = BuildGraph(bundle.deps, a.resources, rep.page_url, &rep.warnings);
  DomainGraph graph = CollapseByDomain(a.tree);
  rep.chain_depth = ComputeChainDepthStats(a.tree);
  rep.domain_nodes = static_cast<int64_t>(graph.nodes.size());
  for (const DomainNode& n : graph.nodes) {
    if (n.is_ad_domain) ++rep.ad_domain_nodes;
  }
  return a;
}

absl::StatusOr<Analysis> AnalyzeDir(const std::filesystem::path& dir,
                                    const RuleSet& rules,
                                    const AnalyzeOptions& options) {
  absl::StatusOr<Bundle> bundle = LoadBundle(dir);
  if (!bundle.ok()) return bundle.status();
  if (bundle->meta.failed) {
    return absl::FailedPreconditionError(
        absl::StrCat(dir.string(), ": bundle is marked failed"));
  }
  return AnalyzeBundle(*bundle, rules, options);
}

std::vector<std::filesystem::path> FindBundles(
    const std::filesystem::path& root) {
  std::vector<std::filesystem::path> out;
  std::error_code ec;
  if (std::filesystem::exists(root / "meta.json", ec)) out.push_back(root);
  for (auto it = std::filesystem::recursive_directory_iterator(root, ec);
       !ec && it != std::filesystem::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_directory() &&
        std::filesystem::exists(it->path() / "meta.json")) {
      out.push_back(it->path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int ResolveWorkers(int requested) {
  int workers = requested > 0
                    ? requested
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ADLENS_WORKERS")) {
    int cap = 0;
    if (SimpleAtoi(env, &cap) && cap > 0) {
      workers = requested > 0 ? std::min(workers, cap) : cap;
    }
  }
  return std::max(workers, 1);
}

namespace {

struct Slot {
  std::optional<PageReport> report;
  std::optional<BundleMeta> meta;  // Present when meta.json parsed.
  bool marked_failed = false;
};

Slot RunOne(const std::filesystem::path& dir, const RuleSet& rules,
            const AnalyzeOptions& options) {
  Slot slot;
  if (absl::StatusOr<std::string> raw = ReadFile(dir / "meta.json"); raw.ok()) {
    if (absl::StatusOr<BundleMeta> meta = ParseMeta(*raw); meta.ok()) {
      slot.marked_failed = meta->failed;
      slot.meta = std::move(*meta);
    }
  }
  if (slot.marked_failed) return slot;
  absl::StatusOr<Analysis> a = AnalyzeDir(dir, rules, options);
  if (a.ok()) slot.report = std::move(a->report);
  return slot;
}

}  // namespace

absl::StatusOr<CorpusReport> RunCorpus(const std::filesystem::path& root,
                                       const RuleSet& rules,
                                       const ScoreTables& scores,
                                       const CorpusOptions& options) {
  std::vector<std::filesystem::path> dirs = FindBundles(root);
  if (dirs.empty()) {
    return absl::NotFoundError(
        absl::StrCat("no bundles under ", root.string()));
  }

  // Each worker writes only its own slots, so the merge below sees the same
  // data in the same order whatever the scheduling was.
  std::vector<Slot> slots(dirs.size());
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i = next++; i < dirs.size(); i = next++) {
      slots[i] = RunOne(dirs[i], rules, options.analyze);
    }
  };
  int workers = std::min<int>(ResolveWorkers(options.workers),
                              static_cast<int>(dirs.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();

  CorpusReport report;
  report.scores = scores;
  report.wot_bands = options.wot_bands;
  report.bundles_total = static_cast<int64_t>(dirs.size());
  report.modes[CrawlMode::kLanding];
  report.modes[CrawlMode::kPostClick];

  struct Group {
    std::vector<double> computation, network, unattributed;
  };
  std::map<std::pair<CrawlMode, std::string>, Group> groups;
  DomainCostTable domains;
  for (const Slot& slot : slots) {
    if (!slot.report) {
      report.warnings.Add(slot.marked_failed ? "corpus.failed_bundle"
                                             : "corpus.invalid_bundle");
      if (slot.meta) {
        groups.try_emplace({slot.meta->crawl_mode, slot.meta->page_url});
      }
      continue;
    }
    const PageReport& page = *slot.report;
    ++report.bundles_valid;
    report.warnings.Merge(page.warnings);
    Group& g = groups[{page.crawl_mode, page.page_url}];
    g.computation.push_back(page.computation_fraction);
    g.network.push_back(page.network_fraction);
    g.unattributed.push_back(page.unattributed_fraction);

    ModeSummary& mode = report.modes[page.crawl_mode];
    for (int s = 0; s < kNumStages; ++s) {
      mode.stages.ct_ad[s] += page.stages.ct_ad[s];
      mode.stages.ct_total[s] += page.stages.ct_total[s];
      mode.stages.ct_unattributed[s] += page.stages.ct_unattributed[s];
    }
    mode.content_types.Merge(page.content_types);
    domains.Add(page.page_url, page.ad_domains);
  }

  for (const auto& [key, g] : groups) {
    if (g.computation.empty()) {
      report.warnings.Add("corpus.page_skipped");
      continue;
    }
    PageSummary p;
    p.crawl_mode = key.first;
    p.page_url = key.second;
    p.repeats = static_cast<int>(g.computation.size());
    p.computation_fraction = Median(g.computation);
    p.network_fraction = Median(g.network);
    p.unattributed_fraction = Median(g.unattributed);
    report.modes[key.first].pages.push_back(std::move(p));
  }
  for (auto& [mode, summary] : report.modes) {
    std::vector<double> comp, net;
    for (const PageSummary& p : summary.pages) {
      comp.push_back(p.computation_fraction);
      net.push_back(p.network_fraction);
    }
    summary.computation_cdf = Ecdf(std::move(comp));
    summary.network_cdf = Ecdf(std::move(net));
  }
  report.domains = domains.Finish();
  return report;
}

namespace {

void PutRatio(json* obj, const std::string& name, Ratio r) {
  (*obj)[name] = r.value;
  (*obj)[name + "Undefined"] = r.undefined;
}

json StagesJson(const StageMetrics& m) {
  json out = json::object();
  for (Stage s : kAllStages) {
    int i = Index(s);
    json row = {{"ctAdUs", m.ct_ad[i]},
                {"ctTotalUs", m.ct_total[i]},
                {"ctUnattributedUs", m.ct_unattributed[i]}};
    PutRatio(&row, "r1", m.r1(s));
    PutRatio(&row, "r2", m.r2(s));
    PutRatio(&row, "r3", m.r3(s));
    out[std::string(StageName(s))] = std::move(row);
  }
  return out;
}

json ContentTypesJson(const ContentTypeMetrics& m) {
  json out = json::object();
  for (ContentType c : kAllContentTypes) {
    const ContentTypeRow& r = m.row(c);
    json row = {{"present", r.present},
                {"nrAd", r.nr_ad},
                {"nrTotal", r.nr_total},
                {"ntAdUs", r.nt_ad},
                {"ntTotalUs", r.nt_total}};
    PutRatio(&row, "nrAdShareOfType", m.nr_ad_within_type(c));
    PutRatio(&row, "nrShareOfAds", m.nr_type_of_ads(c));
    PutRatio(&row, "nrShareOfAll", m.nr_type_of_all(c));
    PutRatio(&row, "ntAdShareOfType", m.nt_ad_within_type(c));
    PutRatio(&row, "ntShareOfAds", m.nt_type_of_ads(c));
    PutRatio(&row, "ntShareOfAll", m.nt_type_of_all(c));
    out[std::string(ContentTypeName(c))] = std::move(row);
  }
  return out;
}

json WarningsJson(const Warnings& w) {
  json out = json::object();
  for (const auto& [code, n] : w.counts()) out[code] = n;
  return out;
}

json PointsJson(const std::vector<CdfPoint>& points) {
  json out = json::array();
  for (const CdfPoint& p : points) out.push_back({{"x", p.x}, {"y", p.y}});
  return out;
}

json SeriesJson(const CdfSeries& s) {
  json bands = json::array();
  for (const CdfBand& b : s.bands) {
    bands.push_back({{"label", b.label}, {"cumulative", b.cumulative}});
  }
  return {{"points", PointsJson(s.points)},
          {"bands", std::move(bands)},
          {"unmatched", s.unmatched},
          {"unmatchedShare", s.unmatched_share}};
}

template <typename Fn>
json ByCost(Fn fn) {
  return {{"computation", SeriesJson(fn(CostKind::kComputation))},
          {"network", SeriesJson(fn(CostKind::kNetwork))}};
}

}  // namespace

json PageReportJson(const PageReport& r) {
  json ad_domains = json::array();
  for (const auto& [domain, t] : r.ad_domains) {
    ad_domains.push_back({{"domain", domain},
                          {"computationUs", t.computation},
                          {"networkUs", t.network}});
  }
  Micros total = r.stages.grand_total();
  Micros ad = r.stages.ad_total();
  Micros unattributed = r.stages.unattributed_total();
  return {
      {"schemaVersion", kReportSchemaVersion},
      {"kind", "page"},
      {"pageUrl", r.page_url},
      {"crawlMode", std::string(CrawlModeName(r.crawl_mode))},
      {"repeatIndex", r.repeat_index},
      {"networkTimeMode", std::string(NetworkTimeModeName(r.network_time))},
      {"computationFraction", r.computation_fraction},
      {"networkFraction", r.network_fraction},
      {"networkFractionUndefined", r.network_fraction_undefined},
      {"unattributedFraction", r.unattributed_fraction},
      {"counts",
       {{"activities", r.activity_count},
        {"requests", r.request_count},
        {"resources", r.resource_count},
        {"adResources", r.ad_resource_count}}},
      {"time",
       {{"totalUs", total},
        {"adUs", ad},
        {"nonAdUs", total - ad - unattributed},
        {"unattributedUs", unattributed}}},
      {"stages", StagesJson(r.stages)},
      {"contentTypes", ContentTypesJson(r.content_types)},
      {"adDomains", std::move(ad_domains)},
      {"graph",
       {{"chainDepthMean", r.chain_depth.mean},
        {"chainDepthMax", r.chain_depth.max},
        {"leafCount", r.chain_depth.leaf_depths.size()},
        {"domainNodes", r.domain_nodes},
        {"adDomainNodes", r.ad_domain_nodes}}},
      {"warnings", WarningsJson(r.warnings)},
  };
}

json CorpusReportJson(const CorpusReport& r) {
  json modes = json::object();
  for (const auto& [mode, s] : r.modes) {
    json pages = json::array();
    for (const PageSummary& p : s.pages) {
      pages.push_back({{"pageUrl", p.page_url},
                       {"repeats", p.repeats},
                       {"computationFraction", p.computation_fraction},
                       {"networkFraction", p.network_fraction},
                       {"unattributedFraction", p.unattributed_fraction}});
    }
    modes[std::string(CrawlModeName(mode))] = {
        {"pageCount", s.pages.size()},
        {"pages", std::move(pages)},
        {"computationCdf", PointsJson(s.computation_cdf)},
        {"networkCdf", PointsJson(s.network_cdf)},
        {"stages", StagesJson(s.stages)},
        {"contentTypes", ContentTypesJson(s.content_types)}};
  }

  json domains = json::array();
  for (const DomainCost& d : r.domains) {
    domains.push_back({{"domain", d.domain},
                       {"computationShare", d.computation_share},
                       {"networkShare", d.network_share},
                       {"computationUs", d.computation_time},
                       {"networkUs", d.network_time},
                       {"referrerCount", d.referrer_count}});
  }

  json trust = json::object();
  if (r.scores.wot) {
    trust["wot"] = ByCost([&](CostKind k) {
      return WotCdf(r.domains, *r.scores.wot, k, r.wot_bands);
    });
  }
  if (r.scores.vt) {
    trust["vt"] =
        ByCost([&](CostKind k) { return VtCdf(r.domains, *r.scores.vt, k); });
  }
  json popularity = {{"referrers", ByCost([&](CostKind k) {
                        return ReferrerCdf(r.domains, k);
                      })}};
  if (r.scores.ranks) {
    popularity["ranks"] = ByCost(
        [&](CostKind k) { return RankCdf(r.domains, *r.scores.ranks, k); });
  }

  return {
      {"schemaVersion", kReportSchemaVersion},
      {"kind", "corpus"},
      {"bundles",
       {{"total", r.bundles_total},
        {"valid", r.bundles_valid},
        {"invalid", r.bundles_total - r.bundles_valid}}},
      {"modes", std::move(modes)},
      {"domains", std::move(domains)},
      {"trust", std::move(trust)},
      {"popularity", std::move(popularity)},
      {"warnings", WarningsJson(r.warnings)},
  };
}

namespace {

std::string FormatDouble(double v) {
  std::string s = absl::StrFormat("%.6f", v);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

void WriteCanonical(const json& v, int indent, std::string* out) {
  const std::string pad(2 * (indent + 1), ' ');
  const std::string close_pad(2 * indent, ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        *out += "{}";
        return;
      }
      // nlohmann's default object is a std::map, so keys iterate sorted.
      *out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) *out += ",\n";
        first = false;
        *out += pad + json(it.key()).dump() + ": ";
        WriteCanonical(it.value(), indent + 1, out);
      }
      *out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        *out += "[]";
        return;
      }
      *out += "[\n";
      for (size_t i = 0; i < v.size(); ++i) {
        if (i > 0) *out += ",\n";
        *out += pad;
        WriteCanonical(v[i], indent + 1, out);
      }
      *out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float:
      *out += FormatDouble(v.get<double>());
      return;
    default:
      *out += v.dump();
      return;
  }
}

}  // namespace

std::string CanonicalJson(const json& value) {
  std::string out;
  WriteCanonical(value, 0, &out);
  out += "\n";
  return out;
}

std::string RenderPageReport(const PageReport& report) {
  return CanonicalJson(PageReportJson(report));
}

std::string RenderCorpusReport(const CorpusReport& report) {
  return CanonicalJson(CorpusReportJson(report));
}

namespace {

std::string StagesCsv(const StageMetrics& m) {
  std::string out = "stage,ct_ad_us,ct_total_us,ct_unattributed_us,r1,r2,r3\n";
  for (Stage s : kAllStages) {
    int i = Index(s);
    absl::StrAppend(
        &out, ToAbsl(StageName(s)), ",", m.ct_ad[i], ",", m.ct_total[i], ",",
        m.ct_unattributed[i], ",", FormatDouble(m.r1(s).value), ",",
        FormatDouble(m.r2(s).value), ",", FormatDouble(m.r3(s).value), "\n");
  }
  return out;
}

std::string ContentTypesCsv(const ContentTypeMetrics& m) {
  std::string out =
      "type,present,nr_ad,nr_total,nt_ad_us,nt_total_us,nr_ad_share_of_type,"
      "nr_share_of_ads,nr_share_of_all,nt_ad_share_of_type,nt_share_of_ads,"
      "nt_share_of_all\n";
  for (ContentType c : kAllContentTypes) {
    const ContentTypeRow& r = m.row(c);
    absl::StrAppend(&out, ToAbsl(ContentTypeName(c)), ",",
                    r.present ? "true" : "false", ",", r.nr_ad, ",", r.nr_total,
                    ",", r.nt_ad, ",", r.nt_total, ",",
                    FormatDouble(m.nr_ad_within_type(c).value), ",",
                    FormatDouble(m.nr_type_of_ads(c).value), ",",
                    FormatDouble(m.nr_type_of_all(c).value), ",",
                    FormatDouble(m.nt_ad_within_type(c).value), ",",
                    FormatDouble(m.nt_type_of_ads(c).value), ",",
                    FormatDouble(m.nt_type_of_all(c).value), "\n");
  }
  return out;
}

std::string TwoColumn(const std::vector<CdfPoint>& points) {
  std::string out = "x,y\n";
  for (const CdfPoint& p : points) {
    absl::StrAppend(&out, FormatDouble(p.x), ",", FormatDouble(p.y), "\n");
  }
  return out;
}

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::map<std::string, std::string> PageCsvTables(const PageReport& report) {
  return {{"stages.csv", StagesCsv(report.stages)},
          {"content_types.csv", ContentTypesCsv(report.content_types)}};
}

std::map<std::string, std::string> CorpusCsvTables(const CorpusReport& report) {
  std::map<std::string, std::string> out;
  std::string pages =
      "mode,page_url,repeats,computation_fraction,network_fraction,"
      "unattributed_fraction\n";
  for (const auto& [mode, s] : report.modes) {
    std::string name(CrawlModeName(mode));
    for (const PageSummary& p : s.pages) {
      absl::StrAppend(&pages, name, ",", CsvField(p.page_url), ",", p.repeats,
                      ",", FormatDouble(p.computation_fraction), ",",
                      FormatDouble(p.network_fraction), ",",
                      FormatDouble(p.unattributed_fraction), "\n");
    }
    out["cdf_" + name + "_computation.csv"] = TwoColumn(s.computation_cdf);
    out["cdf_" + name + "_network.csv"] = TwoColumn(s.network_cdf);
    out["stages_" + name + ".csv"] = StagesCsv(s.stages);
    out["content_types_" + name + ".csv"] = ContentTypesCsv(s.content_types);
  }
  out["pages.csv"] = std::move(pages);

  std::string domains =
      "domain,computation_share,network_share,computation_us,network_us,"
      "referrer_count\n";
  for (const DomainCost& d : report.domains) {
    absl::StrAppend(&domains, CsvField(d.domain), ",",
                    FormatDouble(d.computation_share), ",",
                    FormatDouble(d.network_share), ",", d.computation_time, ",",
                    d.network_time, ",", d.referrer_count, "\n");
  }
  out["domains.csv"] = std::move(domains);

  auto add_series = [&](const std::string& stem, CostKind kind,
                        const CdfSeries& s) {
    out[absl::StrCat("cdf_", stem, "_",
                     kind == CostKind::kComputation ? "computation" : "network",
                     ".csv")] = TwoColumn(s.points);
  };
  for (CostKind kind : {CostKind::kComputation, CostKind::kNetwork}) {
    if (report.scores.wot) {
      add_series(
          "wot", kind,
          WotCdf(report.domains, *report.scores.wot, kind, report.wot_bands));
    }
    if (report.scores.vt) {
      add_series("vt", kind, VtCdf(report.domains, *report.scores.vt, kind));
    }
    if (report.scores.ranks) {
      add_series("ranks", kind,
                 RankCdf(report.domains, *report.scores.ranks, kind));
    }
    add_series("referrers", kind, ReferrerCdf(report.domains, kind));
  }
  return out;
}

}  // namespace adlens
