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

// Parsing of crawl bundles: the browser trace (trace.json), the network log
// (network.jsonl), request dependency edges (deps.jsonl) and meta.json.

#ifndef ADLENS_TRACE_INGEST_H_
#define ADLENS_TRACE_INGEST_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "adlens/common.h"
#include "json.hpp"

namespace adlens {

// Trace event phase codes we distinguish.
inline constexpr char kPhaseComplete = 'X';
inline constexpr char kPhaseBegin = 'B';
inline constexpr char kPhaseEnd = 'E';
inline constexpr char kPhaseMetadata = 'M';

bool IsInstantPhase(char ph);  // 'I', 'i', 'R'
bool IsAsyncPhase(char ph);  // 'b', 'e', 'n', 'S', 'T', 'p', 'F', 's', 't', 'f'

struct TraceEvent {
  int64_t pid = 0;
  int64_t tid = 0;
  Micros ts = 0;
  std::optional<Micros> dur;
  char ph = kPhaseComplete;
  std::string cat;
  std::string name;
  nlohmann::json args = nlohmann::json::object();
  // Position in the input stream; tie-breaker for sorting. Not part of
  // equality.
  int64_t input_index = 0;

  bool operator==(const TraceEvent& other) const;
};

// Parses an event-array trace ("[{...},{...}]" or the object form with a
// "traceEvents" array). A file cut off mid-record is recovered up to the last
// complete object. Begin/end pairs on one thread are fused into complete
// events and the result is sorted by (tid, ts, -dur, input order).
//
// A record that is not valid JSON, or lacks a required field, is an error
// naming its byte offset. Unmatched begin/end events are dropped and counted
// under "trace.unmatched_begin" / "trace.unmatched_end".
absl::StatusOr<std::vector<TraceEvent>> ParseTrace(std::string_view raw,
                                                   Warnings* warnings);

// Canonical event-array form; ParseTrace(SerializeTrace(x)) == x.
std::string SerializeTrace(const std::vector<TraceEvent>& events);

struct NetworkRequest {
  std::string request_id;
  std::string url;
  std::string method;
  std::string mime_type;
  std::string resource_type;
  ContentType content_type = ContentType::kUnknown;
  Micros start_time = 0;
  Micros end_time = 0;
  std::string frame_id;
  std::string first_party;
};

// MIME type wins when it is registered; otherwise the protocol resource type
// decides (XHR/Fetch -> XHR, Stylesheet -> CSS, ...); otherwise Unknown.
ContentType MapContentType(std::string_view mime_type,
                           std::string_view resource_type);

// One JSON object per line. Records missing url/timing, with a relative URL,
// or with endTime < startTime are rejected and counted.
std::vector<NetworkRequest> ParseNetworkLog(std::string_view raw,
                                            Warnings* warnings);

enum class InitiatorKind { kParser, kScript, kRedirect, kOther };
std::string_view InitiatorKindName(InitiatorKind kind);

struct DepEdge {
  std::string child_url;
  std::string parent_url;  // Empty for the root document.
  InitiatorKind initiator_kind = InitiatorKind::kOther;
  // Script on the initiator stack, when the protocol reported one.
  std::string initiator_url;
};

std::vector<DepEdge> ParseDeps(std::string_view raw, Warnings* warnings);

enum class CrawlMode { kLanding, kPostClick };
std::string_view CrawlModeName(CrawlMode mode);

struct BundleMeta {
  std::string page_url;
  CrawlMode crawl_mode = CrawlMode::kLanding;
  int repeat_index = 0;
  bool failed = false;
  std::string filter_list_hash;
};

absl::StatusOr<BundleMeta> ParseMeta(std::string_view raw);

struct Bundle {
  std::filesystem::path dir;
  BundleMeta meta;
  std::vector<TraceEvent> events;
  std::vector<NetworkRequest> requests;
  std::vector<DepEdge> deps;
  Warnings warnings;
};

// Reads the four bundle files. The three data files are parsed concurrently.
absl::StatusOr<Bundle> LoadBundle(const std::filesystem::path& dir);

struct TimeRange {
  Micros begin = 0;
  Micros end = 0;
};

struct BundleSummary {
  int64_t event_count = 0;
  int64_t request_count = 0;
  int64_t edge_count = 0;
  TimeRange trace_range;
  TimeRange network_range;
  bool clocks_overlap = false;
  // Indices into `deps` whose child URL is not in the network log.
  std::vector<size_t> orphan_edges;
};

// Fails on an empty trace or an empty network log.
absl::StatusOr<BundleSummary> ValidateBundle(
    const std::vector<TraceEvent>& trace,
    const std::vector<NetworkRequest>& net, const std::vector<DepEdge>& deps);

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);

}  // namespace adlens

#endif  // ADLENS_TRACE_INGEST_H_
