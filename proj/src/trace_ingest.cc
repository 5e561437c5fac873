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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "adlens/strings.h"
#include "adlens/url.h"

namespace adlens {

using nlohmann::json;

namespace {

bool IsSpace(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }

size_t SkipSpace(std::string_view s, size_t pos) {
  while (pos < s.size() && IsSpace(s[pos])) ++pos;
  return pos;
}

// Returns the offset one past the '}' closing the object that starts at
// `pos`, or npos when the input ends first.
size_t FindObjectEnd(std::string_view s, size_t pos) {
  int depth = 0;
  bool in_string = false;
  for (size_t i = pos; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

// Accepts integer or floating JSON numbers; fractional microseconds are
// rounded at this boundary so everything downstream is integral.
std::optional<int64_t> AsMicros(const json& v) {
  if (v.is_number_integer()) return v.get<int64_t>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (!std::isfinite(d)) return std::nullopt;
    return static_cast<int64_t>(std::llround(d));
  }
  return std::nullopt;
}

absl::Status RecordError(size_t offset, std::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat(
      "malformed trace record at byte ", offset, ": ", ToAbsl(what)));
}

absl::StatusOr<TraceEvent> DecodeEvent(const json& obj, size_t offset,
                                       int64_t index) {
  if (!obj.is_object()) return RecordError(offset, "not an object");
  TraceEvent e;
  e.input_index = index;

  auto ph = obj.find("ph");
  if (ph == obj.end() || !ph->is_string() ||
      ph->get_ref<const std::string&>().size() != 1) {
    return RecordError(offset, "missing or invalid \"ph\"");
  }
  e.ph = ph->get_ref<const std::string&>()[0];

  if (auto name = obj.find("name"); name != obj.end()) {
    if (!name->is_string()) return RecordError(offset, "\"name\" not a string");
    e.name = name->get<std::string>();
  } else if (e.ph != kPhaseEnd) {
    return RecordError(offset, "missing \"name\"");
  }
  if (auto cat = obj.find("cat"); cat != obj.end() && cat->is_string()) {
    e.cat = cat->get<std::string>();
  }

  for (auto [key, field] : {std::pair{"pid", &e.pid}, {"tid", &e.tid}}) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (e.ph == kPhaseMetadata) continue;
      return RecordError(offset, absl::StrCat("missing \"", key, "\""));
    }
    if (!it->is_number_integer()) {
      return RecordError(offset, absl::StrCat("\"", key, "\" not an integer"));
    }
    *field = it->get<int64_t>();
  }

  if (auto ts = obj.find("ts"); ts != obj.end()) {
    std::optional<int64_t> v = AsMicros(*ts);
    if (!v) return RecordError(offset, "\"ts\" not a number");
    if (*v < 0) return RecordError(offset, "negative \"ts\"");
    e.ts = *v;
  } else if (e.ph != kPhaseMetadata) {
    return RecordError(offset, "missing \"ts\"");
  }

  if (auto dur = obj.find("dur"); dur != obj.end()) {
    std::optional<int64_t> v = AsMicros(*dur);
    if (!v) return RecordError(offset, "\"dur\" not a number");
    if (*v < 0) return RecordError(offset, "negative \"dur\"");
    e.dur = *v;
  } else if (e.ph == kPhaseComplete) {
    return RecordError(offset, "complete event without \"dur\"");
  }

  if (auto args = obj.find("args"); args != obj.end() && args->is_object()) {
    e.args = *args;
  }
  return e;
}

// Splits the top-level event array into decoded records.
absl::StatusOr<std::vector<TraceEvent>> ScanEventArray(std::string_view raw,
                                                       Warnings* warnings) {
  std::vector<TraceEvent> events;
  size_t pos = SkipSpace(raw, 0);
  if (pos == raw.size()) return events;

  if (raw[pos] == '{') {
    // Object form: {"traceEvents": [...], ...}.
    size_t key = raw.find("\"traceEvents\"", pos);
    if (key == std::string_view::npos) {
      return RecordError(pos, "object trace without \"traceEvents\"");
    }
    size_t colon = SkipSpace(raw, key + 13);
    if (colon >= raw.size() || raw[colon] != ':') {
      return RecordError(colon, "expected ':' after \"traceEvents\"");
    }
    pos = SkipSpace(raw, colon + 1);
  }
  if (pos >= raw.size() || raw[pos] != '[') {
    return RecordError(pos, "expected '[' starting the event array");
  }
  ++pos;

  int64_t index = 0;
  while (true) {
    pos = SkipSpace(raw, pos);
    while (pos < raw.size() && raw[pos] == ',') pos = SkipSpace(raw, pos + 1);
    if (pos >= raw.size()) {
      warnings->Add("trace.truncated");
      break;
    }
    if (raw[pos] == ']') break;
    if (raw[pos] != '{') return RecordError(pos, "expected '{'");
    size_t end = FindObjectEnd(raw, pos);
    if (end == std::string_view::npos) {
      warnings->Add("trace.truncated");
      break;
    }
    json obj = json::parse(raw.substr(pos, end - pos), nullptr,
                           /*allow_exceptions=*/false);
    if (obj.is_discarded()) return RecordError(pos, "invalid JSON");
    absl::StatusOr<TraceEvent> e = DecodeEvent(obj, pos, index++);
    if (!e.ok()) return e.status();
    events.push_back(*std::move(e));
    pos = end;
  }
  return events;
}

// Fuses B/E pairs per (pid, tid) by LIFO matching on name. An E without a
// name closes the innermost open B.
std::vector<TraceEvent> FuseBeginEnd(std::vector<TraceEvent> in,
                                     Warnings* warnings) {
  std::vector<TraceEvent> out;
  out.reserve(in.size());
  // Slots in `out` for open begins, per thread.
  std::map<std::pair<int64_t, int64_t>, std::vector<size_t>> open;
  std::vector<bool> keep;

  for (TraceEvent& e : in) {
    if (e.ph == kPhaseBegin) {
      open[{e.pid, e.tid}].push_back(out.size());
      out.push_back(std::move(e));
      keep.push_back(false);
      continue;
    }
    if (e.ph == kPhaseEnd) {
      std::vector<size_t>& stack = open[{e.pid, e.tid}];
      auto match = stack.rend();
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        if (e.name.empty() || out[*it].name == e.name) {
          match = it;
          break;
        }
      }
      if (match == stack.rend() || e.ts < out[*match].ts) {
        warnings->Add("trace.unmatched_end");
        continue;
      }
      // Begins opened after the match are improperly nested; drop them.
      size_t depth = static_cast<size_t>(stack.rend() - match) - 1;
      size_t dropped = stack.size() - depth - 1;
      if (dropped > 0) warnings->Add("trace.unmatched_begin", dropped);
      TraceEvent& begin = out[*match];
      begin.ph = kPhaseComplete;
      begin.dur = e.ts - begin.ts;
      for (auto it = e.args.begin(); it != e.args.end(); ++it) {
        if (!begin.args.contains(it.key())) begin.args[it.key()] = it.value();
      }
      keep[*match] = true;
      stack.resize(depth);
      continue;
    }
    out.push_back(std::move(e));
    keep.push_back(true);
  }

  int64_t leftover = 0;
  for (const auto& [thread, stack] : open) leftover += stack.size();
  if (leftover > 0) warnings->Add("trace.unmatched_begin", leftover);

  std::vector<TraceEvent> fused;
  fused.reserve(out.size());
  for (size_t i = 0; i < out.size(); ++i) {
    if (keep[i]) fused.push_back(std::move(out[i]));
  }
  return fused;
}

std::string StringField(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return "";
  return it->get<std::string>();
}

}  // namespace

bool IsInstantPhase(char ph) { return ph == 'I' || ph == 'i' || ph == 'R'; }

bool IsAsyncPhase(char ph) {
  switch (ph) {
    case 'b':
    case 'e':
    case 'n':
    case 'S':
    case 'T':
    case 'p':
    case 'F':
    case 's':
    case 't':
    case 'f':
      return true;
    default:
      return false;
  }
}

bool TraceEvent::operator==(const TraceEvent& other) const {
  return pid == other.pid && tid == other.tid && ts == other.ts &&
         dur == other.dur && ph == other.ph && cat == other.cat &&
         name == other.name && args == other.args;
}

absl::StatusOr<std::vector<TraceEvent>> ParseTrace(std::string_view raw,
                                                   Warnings* warnings) {
  absl::StatusOr<std::vector<TraceEvent>> scanned =
      ScanEventArray(raw, warnings);
  if (!scanned.ok()) return scanned.status();
  std::vector<TraceEvent> events = FuseBeginEnd(*std::move(scanned), warnings);
  std::sort(
      events.begin(), events.end(),
      [](const TraceEvent& a, const TraceEvent& b) {
        return std::make_tuple(a.tid, a.ts, -a.dur.value_or(0), a.input_index) <
               std::make_tuple(b.tid, b.ts, -b.dur.value_or(0), b.input_index);
      });
  return events;
}

std::string SerializeTrace(const std::vector<TraceEvent>& events) {
  std::string out = "[";
  for (size_t i = 0; i < events.size(); ++i) {
    const TraceEvent& e = events[i];
    json obj = json::object();
    obj["pid"] = e.pid;
    obj["tid"] = e.tid;
    obj["ts"] = e.ts;
    if (e.dur) obj["dur"] = *e.dur;
    obj["ph"] = std::string(1, e.ph);
    obj["cat"] = e.cat;
    obj["name"] = e.name;
    obj["args"] = e.args;
    if (i > 0) out += ",\n";
    out += obj.dump();
  }
  out += "]\n";
  return out;
}

ContentType MapContentType(std::string_view mime_type,
                           std::string_view resource_type) {
  std::string mime = AsciiStrToLower(
      StripAsciiWhitespace(mime_type.substr(0, mime_type.find(';'))));
  static const std::map<std::string_view, ContentType> kExact = {
      {"text/javascript", ContentType::kScript},
      {"application/javascript", ContentType::kScript},
      {"application/x-javascript", ContentType::kScript},
      {"application/ecmascript", ContentType::kScript},
      {"text/ecmascript", ContentType::kScript},
      {"text/html", ContentType::kHtml},
      {"application/xhtml+xml", ContentType::kHtml},
      {"text/css", ContentType::kCss},
      {"application/xml", ContentType::kXml},
      {"text/xml", ContentType::kXml},
      {"application/vnd.ms-fontobject", ContentType::kFont},
      {"application/font-woff", ContentType::kFont},
      {"application/font-woff2", ContentType::kFont},
      {"application/x-font-woff", ContentType::kFont},
      {"application/x-font-ttf", ContentType::kFont},
      {"application/x-font-otf", ContentType::kFont},
      {"application/font-sfnt", ContentType::kFont},
  };
  if (auto it = kExact.find(mime); it != kExact.end()) return it->second;
  if (StartsWith(mime, "image/")) return ContentType::kImage;
  if (StartsWith(mime, "font/")) return ContentType::kFont;
  if (StartsWith(mime, "video/") || StartsWith(mime, "audio/")) {
    return ContentType::kMedia;
  }

  static const std::map<std::string_view, ContentType> kByResourceType = {
      {"xhr", ContentType::kXhr},       {"fetch", ContentType::kXhr},
      {"script", ContentType::kScript}, {"stylesheet", ContentType::kCss},
      {"image", ContentType::kImage},   {"font", ContentType::kFont},
      {"document", ContentType::kHtml}, {"media", ContentType::kMedia},
  };
  if (auto it = kByResourceType.find(AsciiStrToLower(resource_type));
      it != kByResourceType.end()) {
    return it->second;
  }
  return ContentType::kUnknown;
}

std::vector<NetworkRequest> ParseNetworkLog(std::string_view raw,
                                            Warnings* warnings) {
  std::vector<NetworkRequest> out;
  for (std::string_view line : StrSplit(raw, '\n')) {
    if (StripAsciiWhitespace(line).empty()) continue;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      warnings->Add("network.malformed_record");
      continue;
    }
    NetworkRequest r;
    r.url = StringField(obj, "url");
    if (r.url.empty()) {
      warnings->Add("network.missing_url");
      continue;
    }
    if (!IsAbsoluteUrl(r.url)) {
      warnings->Add("network.relative_url");
      continue;
    }
    std::optional<int64_t> start, end;
    if (obj.contains("startTime")) start = AsMicros(obj["startTime"]);
    if (obj.contains("endTime")) end = AsMicros(obj["endTime"]);
    if (!start || !end) {
      warnings->Add("network.missing_timing");
      continue;
    }
    if (*end < *start) {
      warnings->Add("network.negative_duration");
      continue;
    }
    r.url = NormalizeUrl(r.url).value_or(r.url);
    r.start_time = *start;
    r.end_time = *end;
    r.request_id = StringField(obj, "requestId");
    r.method = StringField(obj, "method");
    r.mime_type = StringField(obj, "mimeType");
    r.resource_type = StringField(obj, "resourceType");
    r.frame_id = StringField(obj, "frameId");
    r.first_party = StringField(obj, "firstParty");
    r.content_type = MapContentType(r.mime_type, r.resource_type);
    out.push_back(std::move(r));
  }
  return out;
}

std::string_view InitiatorKindName(InitiatorKind kind) {
  switch (kind) {
    case InitiatorKind::kParser:
      return "parser";
    case InitiatorKind::kScript:
      return "script";
    case InitiatorKind::kRedirect:
      return "redirect";
    case InitiatorKind::kOther:
      return "other";
  }
  return "other";
}

std::vector<DepEdge> ParseDeps(std::string_view raw, Warnings* warnings) {
  std::vector<DepEdge> out;
  for (std::string_view line : StrSplit(raw, '\n')) {
    if (StripAsciiWhitespace(line).empty()) continue;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      warnings->Add("deps.malformed_record");
      continue;
    }
    DepEdge edge;
    edge.child_url = StringField(obj, "childUrl");
    if (edge.child_url.empty()) {
      warnings->Add("deps.missing_child");
      continue;
    }
    edge.child_url = NormalizeUrl(edge.child_url).value_or(edge.child_url);
    edge.parent_url = StringField(obj, "parentUrl");
    if (!edge.parent_url.empty()) {
      edge.parent_url = NormalizeUrl(edge.parent_url).value_or(edge.parent_url);
    }
    if (edge.parent_url == edge.child_url) {
      warnings->Add("deps.self_edge");
      continue;
    }
    std::string kind = StringField(obj, "initiatorKind");
    if (kind == "parser") {
      edge.initiator_kind = InitiatorKind::kParser;
    } else if (kind == "script") {
      edge.initiator_kind = InitiatorKind::kScript;
    } else if (kind == "redirect") {
      edge.initiator_kind = InitiatorKind::kRedirect;
    }
    edge.initiator_url = StringField(obj, "initiatorUrl");
    if (!edge.initiator_url.empty()) {
      edge.initiator_url =
          NormalizeUrl(edge.initiator_url).value_or(edge.initiator_url);
    }
    out.push_back(std::move(edge));
  }
  return out;
}

std::string_view CrawlModeName(CrawlMode mode) {
  return mode == CrawlMode::kLanding ? "landing" : "postclick";
}

absl::StatusOr<BundleMeta> ParseMeta(std::string_view raw) {
  json obj = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) {
    return absl::InvalidArgumentError("meta.json is not a JSON object");
  }
  BundleMeta meta;
  meta.page_url = StringField(obj, "pageUrl");
  if (!IsAbsoluteUrl(meta.page_url)) {
    return absl::InvalidArgumentError("meta.json: pageUrl missing or relative");
  }
  meta.page_url = *NormalizeUrl(meta.page_url);
  std::string mode = StringField(obj, "crawlMode");
  if (mode == "landing" || mode.empty()) {
    meta.crawl_mode = CrawlMode::kLanding;
  } else if (mode == "postclick") {
    meta.crawl_mode = CrawlMode::kPostClick;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("meta.json: unknown crawlMode \"", mode, "\""));
  }
  if (auto it = obj.find("repeatIndex"); it != obj.end()) {
    if (!it->is_number_integer()) {
      return absl::InvalidArgumentError("meta.json: repeatIndex not integer");
    }
    meta.repeat_index = it->get<int>();
  }
  if (auto it = obj.find("failed"); it != obj.end() && it->is_boolean()) {
    meta.failed = it->get<bool>();
  }
  meta.filter_list_hash = StringField(obj, "filterListHash");
  return meta;
}

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::StatusOr<Bundle> LoadBundle(const std::filesystem::path& dir) {
  Bundle bundle;
  bundle.dir = dir;
  absl::StatusOr<std::string> meta_raw = ReadFile(dir / "meta.json");
  if (!meta_raw.ok()) return meta_raw.status();
  absl::StatusOr<BundleMeta> meta = ParseMeta(*meta_raw);
  if (!meta.ok()) return meta.status();
  bundle.meta = *std::move(meta);

  absl::StatusOr<std::string> trace_raw = ReadFile(dir / "trace.json");
  if (!trace_raw.ok()) return trace_raw.status();
  absl::StatusOr<std::string> net_raw = ReadFile(dir / "network.jsonl");
  if (!net_raw.ok()) return net_raw.status();
  // A bundle without dependency data is still analyzable.
  absl::StatusOr<std::string> deps_raw = ReadFile(dir / "deps.jsonl");
  if (!deps_raw.ok()) {
    bundle.warnings.Add("bundle.missing_deps");
    deps_raw = std::string();
  }

  Warnings trace_warnings, net_warnings, dep_warnings;
  auto trace_future = std::async(std::launch::async, [&] {
    return ParseTrace(*trace_raw, &trace_warnings);
  });
  auto net_future = std::async(std::launch::async, [&] {
    return ParseNetworkLog(*net_raw, &net_warnings);
  });
  bundle.deps = ParseDeps(*deps_raw, &dep_warnings);
  bundle.requests = net_future.get();
  absl::StatusOr<std::vector<TraceEvent>> events = trace_future.get();
  if (!events.ok()) {
    return absl::Status(events.status().code(),
                        absl::StrCat((dir / "trace.json").string(), ": ",
                                     events.status().message()));
  }
  bundle.events = *std::move(events);
  bundle.warnings.Merge(trace_warnings);
  bundle.warnings.Merge(net_warnings);
  bundle.warnings.Merge(dep_warnings);
  return bundle;
}

absl::StatusOr<BundleSummary> ValidateBundle(
    const std::vector<TraceEvent>& trace,
    const std::vector<NetworkRequest>& net, const std::vector<DepEdge>& deps) {
  if (trace.empty()) {
    return absl::FailedPreconditionError("bundle has zero trace events");
  }
  if (net.empty()) {
    return absl::FailedPreconditionError("bundle has zero network requests");
  }
  BundleSummary summary;
  summary.event_count = static_cast<int64_t>(trace.size());
  summary.request_count = static_cast<int64_t>(net.size());
  summary.edge_count = static_cast<int64_t>(deps.size());

  constexpr Micros kMax = std::numeric_limits<Micros>::max();
  TimeRange tr{kMax, 0};
  for (const TraceEvent& e : trace) {
    if (e.ph == kPhaseMetadata) continue;
    tr.begin = std::min(tr.begin, e.ts);
    tr.end = std::max(tr.end, e.ts + e.dur.value_or(0));
  }
  if (tr.begin == kMax) tr = {0, 0};
  TimeRange nr{kMax, 0};
  std::unordered_set<std::string_view> urls;
  for (const NetworkRequest& r : net) {
    nr.begin = std::min(nr.begin, r.start_time);
    nr.end = std::max(nr.end, r.end_time);
    urls.insert(r.url);
  }
  summary.trace_range = tr;
  summary.network_range = nr;
  summary.clocks_overlap = tr.begin <= nr.end && nr.begin <= tr.end;

  for (size_t i = 0; i < deps.size(); ++i) {
    if (!urls.count(deps[i].child_url)) summary.orphan_edges.push_back(i);
  }
  return summary;
}

}  // namespace adlens
