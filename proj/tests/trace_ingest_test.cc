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

#include "adlens/trace_ingest.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <random>

#include "support/test_support.h"

namespace adlens {
namespace {

using ::testing::HasSubstr;

std::vector<TraceEvent> MustParse(std::string_view raw, Warnings* w) {
  absl::StatusOr<std::vector<TraceEvent>> events = ParseTrace(raw, w);
  EXPECT_TRUE(events.ok()) << events.status();
  return events.ok() ? *events : std::vector<TraceEvent>{};
}

TEST(ParseTraceTest, ArrayAndObjectFormsAgree) {
  const char* body =
      R"([{"pid":1,"tid":2,"ts":10,"dur":5,"ph":"X","name":"Layout"},)"
      R"({"pid":1,"tid":2,"ts":3,"ph":"I","name":"InvalidateLayout"}])";
  Warnings w;
  std::vector<TraceEvent> a = MustParse(body, &w);
  std::vector<TraceEvent> b = MustParse(
      std::string(R"({"metadata":{},"traceEvents":)") + body + "}", &w);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0].name, "InvalidateLayout");  // Sorted by timestamp.
  EXPECT_TRUE(w.empty());
}

TEST(ParseTraceTest, EmptyInputs) {
  Warnings w;
  EXPECT_TRUE(MustParse("", &w).empty());
  EXPECT_TRUE(MustParse("[]", &w).empty());
  EXPECT_TRUE(MustParse(R"({"traceEvents": []})", &w).empty());
}

TEST(ParseTraceTest, FloatTimestampsRound) {
  Warnings w;
  auto e = MustParse(
      R"([{"pid":1,"tid":1,"ts":10.6,"dur":2.4,"ph":"X","name":"Paint"}])", &w);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].ts, 11);
  EXPECT_EQ(e[0].dur, 2);
}

TEST(ParseTraceTest, TruncatedFileRecoversCompleteRecords) {
  Warnings w;
  auto e =
      MustParse(R"([{"pid":1,"tid":1,"ts":1,"dur":2,"ph":"X","name":"Paint"},)"
                R"({"pid":1,"tid":1,"ts":5,"dur":2,"ph":"X","na)",
                &w);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(w.Count("trace.truncated"), 1);
}

TEST(ParseTraceTest, BracesInsideStringsDoNotConfuseScanner) {
  Warnings w;
  auto e = MustParse(
      R"([{"pid":1,"tid":1,"ts":1,"dur":2,"ph":"X","name":"a}\"{b"}])", &w);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].name, "a}\"{b");
}

TEST(ParseTraceTest, MalformedRecordNamesOffset) {
  Warnings w;
  std::string raw =
      R"([{"pid":1,"tid":1,"ts":1,"dur":2,"ph":"X","name":"Paint"},)"
      R"({"pid":1,"tid":1,"ph":"X","name":"Paint","dur":1}])";
  absl::StatusOr<std::vector<TraceEvent>> e = ParseTrace(raw, &w);
  ASSERT_FALSE(e.ok());
  const size_t offset = raw.find(R"({"pid":1,"tid":1,"ph")");
  EXPECT_THAT(std::string(e.status().message()),
              HasSubstr("byte " + std::to_string(offset)));
  EXPECT_THAT(std::string(e.status().message()), HasSubstr("ts"));
}

TEST(ParseTraceTest, RejectsMissingFields) {
  Warnings w;
  EXPECT_FALSE(
      ParseTrace(R"([{"tid":1,"ts":1,"dur":1,"ph":"X","name":"a"}])", &w).ok());
  EXPECT_FALSE(
      ParseTrace(R"([{"pid":1,"tid":1,"ts":1,"ph":"X","name":"a"}])", &w).ok());
  EXPECT_FALSE(
      ParseTrace(R"([{"pid":1,"tid":1,"ts":-1,"dur":1,"ph":"X","name":"a"}])",
                 &w)
          .ok());
  EXPECT_FALSE(
      ParseTrace(R"([{"pid":1,"tid":1,"ts":1,"dur":1,"name":"a"}])", &w).ok());
  EXPECT_FALSE(ParseTrace("[1,2]", &w).ok());
  EXPECT_FALSE(ParseTrace(R"({"events": []})", &w).ok());
}

TEST(ParseTraceTest, MetadataEventsNeedNoTimestamp) {
  Warnings w;
  auto e = MustParse(
      R"([{"ph":"M","name":"thread_name","args":{"name":"CrRendererMain"}}])",
      &w);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].ph, kPhaseMetadata);
}

TEST(ParseTraceTest, FusesBeginEndPairs) {
  Warnings w;
  auto e = MustParse(
      R"([{"pid":1,"tid":1,"ts":10,"ph":"B","name":"Layout","args":{"a":1}},)"
      R"({"pid":1,"tid":1,"ts":12,"ph":"B","name":"Paint"},)"
      R"({"pid":1,"tid":1,"ts":15,"ph":"E","name":"Paint"},)"
      R"({"pid":1,"tid":1,"ts":30,"ph":"E","args":{"b":2}}])",
      &w);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].name, "Layout");
  EXPECT_EQ(e[0].ph, kPhaseComplete);
  EXPECT_EQ(e[0].dur, 20);
  EXPECT_EQ(e[0].args["a"], 1);
  EXPECT_EQ(e[0].args["b"], 2);
  EXPECT_EQ(e[1].dur, 3);
  EXPECT_TRUE(w.empty());
}

TEST(ParseTraceTest, UnmatchedBeginAndEndAreCounted) {
  Warnings w;
  auto e = MustParse(R"([{"pid":1,"tid":1,"ts":10,"ph":"B","name":"Layout"},)"
                     R"({"pid":1,"tid":1,"ts":11,"ph":"B","name":"Paint"},)"
                     R"({"pid":1,"tid":1,"ts":12,"ph":"E","name":"Layout"},)"
                     R"({"pid":1,"tid":2,"ts":13,"ph":"E","name":"Layout"},)"
                     R"({"pid":1,"tid":3,"ts":14,"ph":"B","name":"Open"}])",
                     &w);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].name, "Layout");
  EXPECT_EQ(w.Count("trace.unmatched_begin"), 2);
  EXPECT_EQ(w.Count("trace.unmatched_end"), 1);
}

TEST(ParseTraceTest, EndBeforeBeginIsUnmatched) {
  Warnings w;
  auto e = MustParse(R"([{"pid":1,"tid":1,"ts":10,"ph":"B","name":"Layout"},)"
                     R"({"pid":1,"tid":1,"ts":5,"ph":"E","name":"Layout"}])",
                     &w);
  EXPECT_TRUE(e.empty());
  EXPECT_EQ(w.Count("trace.unmatched_end"), 1);
  EXPECT_EQ(w.Count("trace.unmatched_begin"), 1);
}

TEST(ParseTraceTest, SortOrderLongerFirstOnTies) {
  Warnings w;
  auto e =
      MustParse(R"([{"pid":1,"tid":1,"ts":10,"dur":1,"ph":"X","name":"inner"},)"
                R"({"pid":1,"tid":1,"ts":10,"dur":9,"ph":"X","name":"outer"}])",
                &w);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].name, "outer");
}

TEST(SerializeTraceTest, RoundTripOnRandomBundles) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    Bundle b = testing::RandomBundle(rng, i);
    Warnings w;
    auto again = MustParse(SerializeTrace(b.events), &w);
    EXPECT_EQ(again, b.events) << "bundle " << i;
  }
}

TEST(MapContentTypeTest, MimeWinsThenResourceType) {
  EXPECT_EQ(MapContentType("application/javascript; charset=utf-8", "Other"),
            ContentType::kScript);
  EXPECT_EQ(MapContentType("TEXT/HTML", ""), ContentType::kHtml);
  EXPECT_EQ(MapContentType("image/webp", "Other"), ContentType::kImage);
  EXPECT_EQ(MapContentType("text/css", ""), ContentType::kCss);
  EXPECT_EQ(MapContentType("font/woff2", ""), ContentType::kFont);
  EXPECT_EQ(MapContentType("video/mp4", ""), ContentType::kMedia);
  EXPECT_EQ(MapContentType("", "XHR"), ContentType::kXhr);
  EXPECT_EQ(MapContentType("", "Fetch"), ContentType::kXhr);
  EXPECT_EQ(MapContentType("", "Stylesheet"), ContentType::kCss);
  EXPECT_EQ(MapContentType("application/octet-stream", ""),
            ContentType::kUnknown);
}

TEST(ParseNetworkLogTest, RejectsBadRecords) {
  Warnings w;
  auto reqs = ParseNetworkLog(
      R"({"requestId":"1","url":"HTTPS://A.com/x#f","mimeType":"image/png","startTime":1,"endTime":5})"
      "\n\n"
      R"({"requestId":"2","url":"/relative","startTime":1,"endTime":5})"
      "\n"
      R"({"requestId":"3","url":"https://b.com/","startTime":9,"endTime":5})"
      "\n"
      R"({"requestId":"4","url":"https://b.com/"})"
      "\n"
      R"({"requestId":"5","startTime":1,"endTime":2})"
      "\nnot json\n",
      &w);
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0].url, "https://a.com/x");
  EXPECT_EQ(reqs[0].content_type, ContentType::kImage);
  EXPECT_EQ(w.Count("network.relative_url"), 1);
  EXPECT_EQ(w.Count("network.negative_duration"), 1);
  EXPECT_EQ(w.Count("network.missing_timing"), 1);
  EXPECT_EQ(w.Count("network.missing_url"), 1);
  EXPECT_EQ(w.Count("network.malformed_record"), 1);
}

TEST(ParseDepsTest, KindsAndSelfEdges) {
  Warnings w;
  auto deps = ParseDeps(
      R"({"childUrl":"https://a.com/","parentUrl":""})"
      "\n"
      R"({"childUrl":"https://b.com/x.js","parentUrl":"https://a.com/","initiatorKind":"script","initiatorUrl":"https://C.com/t.js"})"
      "\n"
      R"({"childUrl":"https://b.com/y","parentUrl":"https://b.com/y"})"
      "\n"
      R"({"parentUrl":"https://a.com/"})"
      "\n",
      &w);
  ASSERT_EQ(deps.size(), 2u);
  EXPECT_EQ(deps[0].initiator_kind, InitiatorKind::kOther);
  EXPECT_EQ(deps[1].initiator_kind, InitiatorKind::kScript);
  EXPECT_EQ(deps[1].initiator_url, "https://c.com/t.js");
  EXPECT_EQ(w.Count("deps.self_edge"), 1);
  EXPECT_EQ(w.Count("deps.missing_child"), 1);
}

TEST(ParseMetaTest, Fields) {
  auto meta = ParseMeta(
      R"({"pageUrl":"https://X.com/a","crawlMode":"postclick","repeatIndex":2,"failed":true})");
  ASSERT_TRUE(meta.ok());
  EXPECT_EQ(meta->page_url, "https://x.com/a");
  EXPECT_EQ(meta->crawl_mode, CrawlMode::kPostClick);
  EXPECT_EQ(meta->repeat_index, 2);
  EXPECT_TRUE(meta->failed);
  EXPECT_FALSE(ParseMeta(R"({"pageUrl":"/a"})").ok());
  EXPECT_FALSE(
      ParseMeta(R"({"pageUrl":"https://a.com","crawlMode":"x"})").ok());
  EXPECT_FALSE(ParseMeta("[]").ok());
}

TEST(LoadBundleTest, GroundTruthFixture) {
  absl::StatusOr<Bundle> b = LoadBundle(testing::FixturePath("ground_truth"));
  ASSERT_TRUE(b.ok()) << b.status();
  EXPECT_EQ(b->events.size(), 50u);
  EXPECT_EQ(b->requests.size(), 10u);
  EXPECT_EQ(b->deps.size(), 9u);
  EXPECT_EQ(b->meta.page_url, "https://news.example.com/");
}

TEST(LoadBundleTest, MissingDepsIsAWarning) {
  testing::TempDir tmp;
  std::mt19937_64 rng(1);
  testing::WriteBundle(testing::RandomBundle(rng, 0), tmp.path());
  std::filesystem::remove(tmp.path() / "deps.jsonl");
  absl::StatusOr<Bundle> b = LoadBundle(tmp.path());
  ASSERT_TRUE(b.ok());
  EXPECT_EQ(b->warnings.Count("bundle.missing_deps"), 1);
  EXPECT_TRUE(b->deps.empty());
}

TEST(LoadBundleTest, MissingTraceFails) {
  testing::TempDir tmp;
  std::mt19937_64 rng(1);
  testing::WriteBundle(testing::RandomBundle(rng, 0), tmp.path());
  std::filesystem::remove(tmp.path() / "trace.json");
  EXPECT_FALSE(LoadBundle(tmp.path()).ok());
}

TEST(ValidateBundleTest, ClockOverlapAndOrphans) {
  std::vector<TraceEvent> trace(1);
  trace[0].ts = 100;
  trace[0].dur = 50;
  std::vector<NetworkRequest> net(1);
  net[0].url = "https://a.com/";
  net[0].start_time = 120;
  net[0].end_time = 400;
  std::vector<DepEdge> deps = {{"https://a.com/", ""},
                               {"https://b.com/", "https://a.com/"}};
  auto s = ValidateBundle(trace, net, deps);
  ASSERT_TRUE(s.ok());
  EXPECT_TRUE(s->clocks_overlap);
  EXPECT_EQ(s->orphan_edges, std::vector<size_t>{1});
  EXPECT_EQ(s->trace_range.end, 150);

  net[0].start_time = 10'000'000;
  net[0].end_time = 10'000'001;
  EXPECT_FALSE(ValidateBundle(trace, net, deps)->clocks_overlap);
  EXPECT_FALSE(ValidateBundle({}, net, deps).ok());
  EXPECT_FALSE(ValidateBundle(trace, {}, deps).ok());
}

}  // namespace
}  // namespace adlens
