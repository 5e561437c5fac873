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

#ifndef ADLENS_ACTIVITY_EXTRACTOR_H_
#define ADLENS_ACTIVITY_EXTRACTOR_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "adlens/common.h"
#include "adlens/trace_ingest.h"

namespace adlens {

// Shell-style glob: '*' matches any run, '?' any single character.
bool GlobMatch(std::string_view pattern, std::string_view text);

// Ordered (glob -> Stage | pruned) table over trace event names. The first
// matching entry wins.
class StageMap {
 public:
  struct Entry {
    std::string pattern;
    std::optional<Stage> stage;  // nullopt: pruned.
  };

  struct Lookup {
    bool matched = false;
    std::optional<Stage> stage;
  };

  // Parses "<pattern> -> <Stage|Pruned>" lines; '#' starts a comment line.
  static absl::StatusOr<StageMap> Parse(std::string_view text);
  // The table shipped as data/stage_map.default.
  static const StageMap& Default();
  static std::string_view DefaultText();

  Lookup Find(std::string_view event_name) const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

// Stage of a trace event, or nullopt when it is pruned. Only complete events
// can carry a stage; names the map does not know are pruned and counted under
// "stage.unknown_name".
std::optional<Stage> ClassifyEvent(const TraceEvent& e, const StageMap& map,
                                   Warnings* warnings);

struct Activity {
  int64_t id = 0;
  Stage stage = Stage::kScripting;
  Micros start = 0;
  Micros end = 0;
  // Duration minus nested children; filled in by BuildCallStacks.
  Micros self_time = 0;
  int64_t pid = 0;
  int64_t tid = 0;
  std::string name;
  std::optional<std::string> resource_hint;  // Normalized absolute URL.
  std::optional<std::string> frame_id;

  Micros duration() const { return end - start; }
};

enum class InvalidationKind { kStyleRecalc, kLayoutInvalidate };
std::string_view InvalidationKindName(InvalidationKind kind);

// An instant event that schedules a later style recalculation or layout.
struct InvalidationMarker {
  InvalidationKind kind = InvalidationKind::kStyleRecalc;
  Micros ts = 0;
  int64_t pid = 0;
  int64_t tid = 0;
  std::optional<std::string> frame_id;
  // URL from the event's own stack trace, when recorded.
  std::optional<std::string> resource_hint;
};

// Marker kind for an event name, e.g. "ScheduleStyleRecalculation".
std::optional<InvalidationKind> MarkerKindForName(std::string_view name);

struct Extraction {
  std::vector<Activity> activities;
  std::vector<InvalidationMarker> markers;
  // Every input event that did not become an Activity, markers included.
  int64_t pruned = 0;
};

// One Activity per non-pruned complete event, in input order, with dense ids.
// `events` must be sorted as ParseTrace returns them.
Extraction ExtractActivities(const std::vector<TraceEvent>& events,
                             const StageMap& map, Warnings* warnings);

// Pulls a resource URL out of an event's args (data.url, beginData.url,
// url, data.stackTrace[0].url). Non-absolute URLs are ignored.
std::optional<std::string> ResourceHintFromArgs(const nlohmann::json& args);
std::optional<std::string> FrameIdFromArgs(const nlohmann::json& args);

}  // namespace adlens

#endif  // ADLENS_ACTIVITY_EXTRACTOR_H_
