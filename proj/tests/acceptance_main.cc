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

// Acceptance suite: one PASS/FAIL line per criterion, exit 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "absl/strings/str_cat.h"
#include "adlens/dependency_graph.h"
#include "adlens/metrics.h"
#include "adlens/report.h"
#include "support/test_support.h"

namespace adlens {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Collects the first few mismatches of one criterion.
class Check {
 public:
  void Expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    if (failures_.size() < 5) failures_.push_back(what);
    ++failed_;
  }
  bool ok() const { return failed_ == 0 && checks_ > 0; }
  std::string Summary() const {
    if (checks_ == 0) return "no checks ran";
    if (failed_ == 0) return absl::StrCat(checks_, " checks");
    std::string out = absl::StrCat(failed_, "/", checks_, " failed:");
    for (const std::string& f : failures_) out += " [" + f + "]";
    return out;
  }

 private:
  int64_t checks_ = 0;
  int64_t failed_ = 0;
  std::vector<std::string> failures_;
};

absl::StatusOr<Analysis> Fixture(const char* dir,
                                 const char* filters = "filters.txt") {
  return AnalyzeDir(testing::FixturePath(dir), testing::FixtureRules(filters));
}

void GroundTruth(Check& c) {
  json labels = testing::ReadFixtureJson("ground_truth/labels.json");
  RuleSet rules = testing::FixtureRules("filters.txt");
  auto t0 = std::chrono::steady_clock::now();
  absl::StatusOr<Analysis> a =
      AnalyzeDir(testing::FixturePath("ground_truth"), rules);
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  c.Expect(a.ok(), "analyze failed");
  if (!a.ok()) return;
  c.Expect(secs < 1.0, absl::StrCat("runtime ", secs, " s"));
  c.Expect(a->attributed.size() == labels["activities"].size(),
           "activity count");
  std::map<std::tuple<int64_t, int64_t, Micros, std::string>,
           const AttributedActivity*>
      by_key;
  for (const AttributedActivity& rec : a->attributed) {
    by_key[{rec.activity.pid, rec.activity.tid, rec.activity.start,
            rec.activity.name}] = &rec;
  }
  for (const json& l : labels["activities"]) {
    auto it =
        by_key.find({l["pid"].get<int64_t>(), l["tid"].get<int64_t>(),
                     l["ts"].get<Micros>(), l["name"].get<std::string>()});
    c.Expect(it != by_key.end(), "missing " + l.dump());
    if (it == by_key.end()) continue;
    const AttributedActivity& rec = *it->second;
    std::optional<std::string> want;
    if (!l["resource"].is_null()) want = l["resource"].get<std::string>();
    c.Expect(
        rec.resource == want &&
            AttributionPathName(rec.path) == l["path"].get<std::string>() &&
            rec.activity.self_time == l["selfUs"].get<Micros>(),
        l.dump());
  }
}

void ExpectConserved(Check& c, const Analysis& a, const std::string& what) {
  const StageMetrics& m = a.report.stages;
  Micros ad = 0, non_ad = 0, unattributed = 0;
  for (Stage s : kAllStages) {
    const int i = Index(s);
    ad += m.ct_ad[i];
    unattributed += m.ct_unattributed[i];
    non_ad += m.ct_total[i] - m.ct_ad[i] - m.ct_unattributed[i];
  }
  Micros roots = 0;
  for (int64_t id : a.forest.roots) {
    roots += a.extraction.activities[id].duration();
  }
  const Micros self = testing::TotalSelfTime(a.attributed);
  c.Expect(ad + non_ad + unattributed == self && self == roots, what);
}

void Conservation(Check& c) {
  RuleSet rules = testing::FixtureRules("filters.txt");
  for (const char* dir :
       {"ground_truth", "listing", "echo88", "echo15", "cnn_like"}) {
    absl::StatusOr<Analysis> a = AnalyzeDir(testing::FixturePath(dir), rules);
    c.Expect(a.ok(), dir);
    if (a.ok()) ExpectConserved(c, *a, dir);
  }
  for (const fs::path& dir : FindBundles(testing::FixturePath("corpus"))) {
    absl::StatusOr<Analysis> a = AnalyzeDir(dir, rules);
    if (a.ok()) ExpectConserved(c, *a, dir.string());
  }
  std::mt19937_64 rng(21);
  RuleSet synthetic = testing::SyntheticRules();
  for (int i = 0; i < 100; ++i) {
    absl::StatusOr<Analysis> a =
        AnalyzeBundle(testing::RandomBundle(rng, i), synthetic);
    c.Expect(a.ok(), absl::StrCat("random ", i));
    if (a.ok()) ExpectConserved(c, *a, absl::StrCat("random ", i));
  }
}

void RatioIdentities(Check& c) {
  std::vector<std::pair<std::string, StageMetrics>> all;
  RuleSet rules = testing::FixtureRules("filters.txt");
  for (const char* dir : {"ground_truth", "echo88", "echo15"}) {
    absl::StatusOr<Analysis> a = AnalyzeDir(testing::FixturePath(dir), rules);
    if (a.ok()) all.push_back({dir, a->report.stages});
  }
  absl::StatusOr<Analysis> cnn = Fixture("cnn_like", "cnn_like/filters.txt");
  if (cnn.ok()) all.push_back({"cnn_like", cnn->report.stages});
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    absl::StatusOr<Analysis> a =
        AnalyzeBundle(testing::RandomBundle(rng, i), testing::SyntheticRules());
    if (a.ok()) all.push_back({absl::StrCat("random ", i), a->report.stages});
  }
  int with_ads = 0;
  for (const auto& [what, m] : all) {
    if (m.ad_total() == 0) continue;
    ++with_ads;
    double r2 = 0, r3 = 0;
    for (Stage s : kAllStages) {
      r2 += m.r2(s).value;
      r3 += m.r3(s).value;
    }
    c.Expect(std::abs(r2 - 1) <= 1e-9 && std::abs(r3 - 1) <= 1e-9, what);
  }
  c.Expect(with_ads >= 50, absl::StrCat(with_ads, " bundles with ads"));
}

void CallStackOracle(Check& c) {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 1000; ++iter) {
    const int n = std::uniform_int_distribution<int>(1, 500)(rng);
    std::vector<testing::Interval> iv = testing::RandomNestedIntervals(rng, n);
    std::shuffle(iv.begin(), iv.end(), rng);
    std::vector<Activity> acts = testing::ActivitiesFor(iv);
    Warnings w;
    CallForest f = BuildCallStacks(&acts, &w);
    std::vector<std::optional<size_t>> want = testing::EnclosureOracle(iv);
    bool same = true;
    for (size_t i = 0; i < acts.size(); ++i) {
      std::optional<size_t> got;
      if (std::optional<int64_t> p = f.node(i).parent_id) got = *p;
      same = same && got == want[i];
    }
    c.Expect(same && w.empty(), absl::StrCat("iteration ", iter, " n=", n));
  }
}

void FilterOracle(Check& c) {
  std::vector<testing::FilterCorpusCase> corpus = testing::LoadFilterCorpus();
  c.Expect(corpus.size() >= 200, absl::StrCat(corpus.size(), " cases"));
  for (const testing::FilterCorpusCase& fc : corpus) {
    c.Expect(RuleSet::Parse(fc.rules).Match(fc.context).is_ad == fc.expected,
             fc.line);
  }
  std::mt19937_64 rng(99);
  int cases = 0;
  while (cases < 10000) {
    RuleSet set = RuleSet::Parse(testing::RandomRuleList(rng));
    for (int k = 0; k < 20; ++k, ++cases) {
      MatchContext ctx = testing::RandomMatchContext(rng);
      c.Expect(set.Match(ctx) == set.MatchNaive(ctx), ctx.url);
    }
  }
}

void FirstInitiator(Check& c) {
  std::mt19937_64 rng(2026);
  for (int iter = 0; iter < 2000; ++iter) {
    testing::InitiatorTrial t = testing::RunFirstInitiatorTrial(rng);
    c.Expect(t.attributed == t.first_firer &&
                 t.path == AttributionPath::kInvalidationInitiator,
             absl::StrCat("iteration ", iter));
  }
}

void GraphFixture(Check& c) {
  json expected = testing::ReadFixtureJson("cnn_like/expected.json");
  absl::StatusOr<Analysis> a = Fixture("cnn_like", "cnn_like/filters.txt");
  c.Expect(a.ok(), "analyze failed");
  if (!a.ok()) return;
  DomainGraph g = CollapseByDomain(a->tree);
  std::map<std::string, std::vector<std::string>> levels;
  std::set<std::string> ad_domains, all_domains;
  for (const DomainNode& n : g.nodes) {
    levels[std::to_string(n.level)].push_back(n.domain);
    all_domains.insert(n.domain);
    if (n.is_ad_domain) ad_domains.insert(n.domain);
  }
  c.Expect(levels == expected["levels"].get<decltype(levels)>(), "levels");
  c.Expect(ad_domains == expected["adDomains"].get<std::set<std::string>>(),
           "ad domains");
  c.Expect(static_cast<int>(all_domains.size()) ==
               expected["distinctDomains"].get<int>(),
           "distinct domains");
  ChainDepthStats depth = ComputeChainDepthStats(a->tree);
  c.Expect(depth.leaf_depths == expected["leafDepths"].get<std::vector<int>>(),
           "leaf depths");
  c.Expect(std::abs(depth.mean - expected["meanDepth"].get<double>()) < 1e-12,
           absl::StrCat("mean depth ", depth.mean));
  c.Expect(depth.max == expected["maxDepth"].get<int>(), "max depth");
}

void EchoFixtures(Check& c) {
  absl::StatusOr<Analysis> e88 = Fixture("echo88");
  c.Expect(e88.ok(), "echo88 failed");
  if (e88.ok()) {
    json j = PageReportJson(e88->report);
    std::string r2 = CanonicalJson(j["stages"]["Scripting"]["r2"]);
    c.Expect(r2 == "0.880000\n", "echo88 r2 " + r2);
  }
  absl::StatusOr<Analysis> e15 = Fixture("echo15");
  c.Expect(e15.ok(), "echo15 failed");
  if (e15.ok()) {
    std::string f =
        CanonicalJson(PageReportJson(e15->report)["computationFraction"]);
    c.Expect(f == "0.150000\n", "echo15 fraction " + f);
  }
}

void Determinism(Check& c) {
  RuleSet rules = testing::FixtureRules("filters.txt");
  std::string first_page;
  for (int run = 0; run < 3; ++run) {
    absl::StatusOr<Analysis> a =
        AnalyzeDir(testing::FixturePath("ground_truth"), rules);
    c.Expect(a.ok(), "analyze failed");
    if (!a.ok()) return;
    std::string text = RenderPageReport(a->report);
    if (run == 0) first_page = text;
    c.Expect(text == first_page, absl::StrCat("analyze run ", run));
  }

  testing::TempDir tmp;
  fs::copy(testing::FixturePath("corpus"), tmp.path() / "fixture",
           fs::copy_options::recursive);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 40; ++i) {
    Bundle b = testing::RandomBundle(rng, i % 15);
    b.meta.repeat_index = i / 15;
    b.meta.crawl_mode =
        i % 4 == 0 ? CrawlMode::kPostClick : CrawlMode::kLanding;
    testing::WriteBundle(b, tmp.path() / "random" / absl::StrCat("b", i));
  }
  rules.Append("||adnet.test^\n");
  ScoreTables scores;
  scores.wot = *ParseWotCsv(testing::ReadFixture("scores/wot.csv"));
  scores.vt = *ParseVtCsv(testing::ReadFixture("scores/vt.csv"));
  scores.ranks = *ParseRanksCsv(testing::ReadFixture("scores/ranks.csv"));
  std::string first;
  for (int workers : {1, 4, 16, 4, 1}) {
    CorpusOptions opts;
    opts.workers = workers;
    absl::StatusOr<CorpusReport> r = RunCorpus(tmp.path(), rules, scores, opts);
    c.Expect(r.ok(), absl::StrCat("corpus workers=", workers));
    if (!r.ok()) return;
    std::string text = RenderCorpusReport(*r);
    for (const auto& [name, csv] : CorpusCsvTables(*r)) {
      text += name + "\n" + csv;
    }
    if (first.empty()) first = text;
    c.Expect(text == first, absl::StrCat("corpus workers=", workers));
  }
}

void Listing(Check& c) {
  absl::StatusOr<Analysis> a =
      AnalyzeDir(testing::FixturePath("listing"), RuleSet());
  c.Expect(a.ok(), "analyze failed");
  if (!a.ok()) return;
  Micros linkid = 0;
  for (const AttributedActivity& rec : a->attributed) {
    if (rec.resource == "https://www.google-analytics.com/linkid.js" &&
        rec.activity.stage == Stage::kScripting) {
      linkid += rec.activity.self_time;
    }
  }
  c.Expect(linkid == 839, absl::StrCat(linkid, " us"));
}

DomainCost Cost(std::string d, Micros comp, Micros net, int64_t refs) {
  DomainCost c;
  c.domain = std::move(d);
  c.computation_time = comp;
  c.network_time = net;
  c.referrer_count = refs;
  return c;
}

void Near(Check& c, double got, double want, double tol,
          const std::string& what) {
  c.Expect(std::abs(got - want) <= tol,
           absl::StrCat(what, " got ", got, " want ", want));
}

void TrustCdfs(Check& c) {
  const std::vector<DomainCost> costs = {
      Cost("d1.com", 400, 50, 5), Cost("d2.com", 300, 150, 3),
      Cost("d3.com", 150, 210, 3), Cost("d4.com", 100, 250, 1),
      Cost("d5.com", 50, 340, 1)};
  const std::map<std::string, double> wot = {
      {"d1.com", 0.9}, {"d2.com", 0.65}, {"d3.com", 0.65}, {"d4.com", 0.3}};

  CdfSeries w = WotCdf(costs, wot, CostKind::kComputation);
  c.Expect(w.points.size() == 3, "wot points");
  if (w.points.size() == 3) {
    Near(c, w.points[0].y, 400.0 / 950.0, 1e-9, "wot comp 0.9");
    Near(c, w.points[1].y, 850.0 / 950.0, 1e-9, "wot comp 0.65");
    Near(c, w.points[2].y, 1.0, 1e-9, "wot comp 0.3");
  }
  Near(c, w.unmatched_share, 50.0 / 1000.0, 1e-9, "wot unmatched");
  CdfSeries wn = WotCdf(costs, wot, CostKind::kNetwork);
  if (wn.points.size() == 3) {
    Near(c, wn.points[0].y, 50.0 / 660.0, 1e-9, "wot net 0.9");
    Near(c, wn.points[1].y, 410.0 / 660.0, 1e-9, "wot net 0.65");
  } else {
    c.Expect(false, "wot net points");
  }

  CdfSeries r = RankCdf(
      costs,
      {{"d1.com", 10}, {"d2.com", 200}, {"d3.com", 50}, {"d5.com", 1000}},
      CostKind::kComputation);
  c.Expect(r.points.size() == 4, "rank points");
  if (r.points.size() == 4) {
    Near(c, r.points[0].y, 400.0 / 900.0, 1e-9, "rank 10");
    Near(c, r.points[1].y, 550.0 / 900.0, 1e-9, "rank 50");
    Near(c, r.points[2].y, 850.0 / 900.0, 1e-9, "rank 200");
    Near(c, r.points[3].y, 1.0, 1e-9, "rank 1000");
  }
  Near(c, r.unmatched_share, 0.1, 1e-9, "rank unmatched");

  Near(c, VtScore{68, 71}.score(), 0.957746, 1e-6, "vt 68/71");
}

struct Criterion {
  int number;
  const char* title;
  std::function<void(Check&)> run;
};

}  // namespace
}  // namespace adlens

int main() {
  using adlens::Check;
  const std::vector<adlens::Criterion> criteria = {
      {1, "ground-truth attribution", adlens::GroundTruth},
      {2, "time conservation", adlens::Conservation},
      {3, "ratio identities", adlens::RatioIdentities},
      {4, "call-stack oracle", adlens::CallStackOracle},
      {5, "filter oracle and index", adlens::FilterOracle},
      {6, "first-initiator property", adlens::FirstInitiator},
      {7, "dependency graph fixture", adlens::GraphFixture},
      {8, "echo fixtures", adlens::EchoFixtures},
      {9, "determinism", adlens::Determinism},
      {10, "listing attribution", adlens::Listing},
      {11, "trust and popularity CDFs", adlens::TrustCdfs},
  };
  int failed = 0;
  for (const adlens::Criterion& cr : criteria) {
    Check check;
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.Expect(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %2d %s: %s\n", check.ok() ? "PASS" : "FAIL", cr.number,
                cr.title, check.Summary().c_str());
    if (!check.ok()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
