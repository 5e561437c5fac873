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

#include "adlens/activity_extractor.h"

#include "absl/status/status.h"
#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "adlens/strings.h"
#include "adlens/url.h"

namespace adlens {

using nlohmann::json;

// Generated at configure time from data/stage_map.default.
extern const char kStageMapDefaultData[];

bool GlobMatch(std::string_view pattern, std::string_view text) {
  size_t p = 0, t = 0;
  size_t star = std::string_view::npos, resume = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      resume = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++resume;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

absl::StatusOr<StageMap> StageMap::Parse(std::string_view text) {
  StageMap map;
  int line_no = 0;
  for (std::string_view line : StrSplit(text, '\n')) {
    ++line_no;
    line = StripAsciiWhitespace(line);
    if (line.empty() || line.front() == '#') continue;
    size_t arrow = line.rfind("->");
    if (arrow == std::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("stage map line ", line_no, ": expected '->'"));
    }
    std::string_view pattern = StripAsciiWhitespace(line.substr(0, arrow));
    std::string_view target = StripAsciiWhitespace(line.substr(arrow + 2));
    if (pattern.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("stage map line ", line_no, ": empty pattern"));
    }
    Entry entry{std::string(pattern), std::nullopt};
    if (target != "Pruned") {
      entry.stage = StageFromName(target);
      if (!entry.stage) {
        return absl::InvalidArgumentError(
            absl::StrCat("stage map line ", line_no, ": unknown target \"",
                         ToAbsl(target), "\""));
      }
    }
    map.entries_.push_back(std::move(entry));
  }
  return map;
}

std::string_view StageMap::DefaultText() { return kStageMapDefaultData; }

const StageMap& StageMap::Default() {
  static const StageMap* map = [] {
    absl::StatusOr<StageMap> parsed = Parse(DefaultText());
    return new StageMap(parsed.ok() ? *std::move(parsed) : StageMap());
  }();
  return *map;
}

StageMap::Lookup StageMap::Find(std::string_view event_name) const {
  for (const Entry& entry : entries_) {
    if (GlobMatch(entry.pattern, event_name)) return {true, entry.stage};
  }
  return {};
}

std::optional<Stage> ClassifyEvent(const TraceEvent& e, const StageMap& map,
                                   Warnings* warnings) {
  if (e.ph != kPhaseComplete) return std::nullopt;
  StageMap::Lookup found = map.Find(e.name);
  if (!found.matched) {
    warnings->Add("stage.unknown_name");
    return std::nullopt;
  }
  return found.stage;
}

std::string_view InvalidationKindName(InvalidationKind kind) {
  return kind == InvalidationKind::kStyleRecalc ? "StyleRecalc"
                                                : "LayoutInvalidate";
}

std::optional<InvalidationKind> MarkerKindForName(std::string_view name) {
  if (name == "ScheduleStyleRecalculation" ||
      name == "Schedule Style Recalculation") {
    return InvalidationKind::kStyleRecalc;
  }
  if (name == "InvalidateLayout" || name == "Layout Invalidate") {
    return InvalidationKind::kLayoutInvalidate;
  }
  return std::nullopt;
}

namespace {

const json* Path(const json& root, std::initializer_list<const char*> keys) {
  const json* node = &root;
  for (const char* key : keys) {
    if (!node->is_object()) return nullptr;
    auto it = node->find(key);
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node;
}

std::optional<std::string> AbsoluteUrlAt(const json* node) {
  if (node == nullptr || !node->is_string()) return std::nullopt;
  return NormalizeUrl(node->get_ref<const std::string&>());
}

}  // namespace

std::optional<std::string> ResourceHintFromArgs(const json& args) {
  for (const json* node :
       {Path(args, {"data", "url"}), Path(args, {"beginData", "url"}),
        Path(args, {"url"})}) {
    if (auto url = AbsoluteUrlAt(node)) return url;
  }
  if (const json* stack = Path(args, {"data", "stackTrace"});
      stack != nullptr && stack->is_array() && !stack->empty()) {
    if (auto url = AbsoluteUrlAt(Path((*stack)[0], {"url"}))) return url;
  }
  return std::nullopt;
}

std::optional<std::string> FrameIdFromArgs(const json& args) {
  for (const json* node :
       {Path(args, {"data", "frame"}), Path(args, {"beginData", "frame"}),
        Path(args, {"frame"})}) {
    if (node != nullptr && node->is_string() &&
        !node->get_ref<const std::string&>().empty()) {
      return node->get<std::string>();
    }
  }
  return std::nullopt;
}

Extraction ExtractActivities(const std::vector<TraceEvent>& events,
                             const StageMap& map, Warnings* warnings) {
  Extraction out;
  for (const TraceEvent& e : events) {
    if (std::optional<InvalidationKind> kind = MarkerKindForName(e.name);
        kind && (IsInstantPhase(e.ph) || e.dur.value_or(0) == 0)) {
      out.markers.push_back({*kind, e.ts, e.pid, e.tid, FrameIdFromArgs(e.args),
                             ResourceHintFromArgs(e.args)});
      ++out.pruned;
      continue;
    }
    std::optional<Stage> stage = ClassifyEvent(e, map, warnings);
    if (!stage) {
      ++out.pruned;
      continue;
    }
    Activity a;
    a.id = static_cast<int64_t>(out.activities.size());
    a.stage = *stage;
    a.start = e.ts;
    a.end = e.ts + e.dur.value_or(0);
    a.self_time = a.end - a.start;
    a.pid = e.pid;
    a.tid = e.tid;
    a.name = e.name;
    a.resource_hint = ResourceHintFromArgs(e.args);
    a.frame_id = FrameIdFromArgs(e.args);
    out.activities.push_back(std::move(a));
  }
  return out;
}

}  // namespace adlens
