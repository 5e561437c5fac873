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

// Binds every Activity to the web resource that initiated it.
//
// Parsing and evaluation work (HTML parsing, script evaluation, stylesheet
// parsing) names its document in the trace args, or inherits it from the
// nearest enclosing activity on the same thread. Tree manipulation and
// rendering work is attributed through the invalidation that scheduled it:
// a style recalculation or layout takes the resource that first fired the
// matching invalidation marker, and composite/paint follow the chain back to
// the most recent styling or layout.

#ifndef ADLENS_RESOURCE_MAPPER_H_
#define ADLENS_RESOURCE_MAPPER_H_

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "adlens/activity_extractor.h"
#include "adlens/common.h"

namespace adlens {

struct StackNode {
  int64_t activity_id = 0;
  std::optional<int64_t> parent_id;
  std::vector<int64_t> child_ids;
  int depth = 0;
};

// Per-thread call stacks. `nodes` is indexed by activity id.
struct CallForest {
  std::vector<StackNode> nodes;
  std::vector<int64_t> roots;

  const StackNode& node(int64_t id) const { return nodes[id]; }
};

// Links each activity to the minimal enclosing activity on its (pid, tid)
// and fills in self_time. Activities must carry dense ids equal to their
// index. A later-starting activity that partially overlaps its predecessor
// is truncated to nest inside it ("stack.overlap_truncated").
CallForest BuildCallStacks(std::vector<Activity>* activities,
                           Warnings* warnings);

enum class AttributionGroup {
  kParsingAndEvaluation,
  kTreeManipulationAndRendering,
};

AttributionGroup GroupOf(const Activity& a);

enum class AttributionPath {
  kExplicitArgs,
  kAncestorInheritance,
  kInvalidationInitiator,
  kRenderChain,
  kUnattributed,
};
std::string_view AttributionPathName(AttributionPath path);

struct AttributedActivity {
  Activity activity;
  std::optional<std::string> resource;  // nullopt: Unattributed.
  AttributionPath path = AttributionPath::kUnattributed;
};

// The resource named by the activity's own args.
std::optional<std::string> AttributeExplicit(const Activity& a);

// Nearest ancestor of `a` present in `resolved`.
std::optional<std::string> AttributeByAncestor(
    const Activity& a, const CallForest& forest,
    const std::unordered_map<int64_t, std::string>& resolved);

// Pending-invalidation state plus the render timeline, for the tree
// manipulation and rendering group. Feed markers and activities in global
// timestamp order.
class RenderAttributor {
 public:
  struct Result {
    std::optional<std::string> resource;
    AttributionPath path = AttributionPath::kUnattributed;
    // True when a pending invalidation was consumed but its initiator was
    // unknown; the caller may fall back to the ancestor walk.
    bool consumed_unknown = false;
  };

  // Registers an invalidation. While one of the same kind is pending for the
  // same scope, later ones are ignored: the first firing wins.
  void OnMarker(const InvalidationMarker& marker,
                std::optional<std::string> initiator);

  // Styling consumes a pending StyleRecalc, Layout a pending
  // LayoutInvalidate; Composite and Paint take the resource of the last
  // executed Styling or Layout in the same renderer process.
  Result Attribute(const Activity& a);

  // Records a Styling or Layout activity as executed, with its final
  // resource, so later Composite/Paint can chain to it.
  void RecordExecuted(const Activity& a,
                      const std::optional<std::string>& resource);

  size_t pending_count() const { return pending_.size(); }

 private:
  struct Pending {
    std::optional<std::string> initiator;
    Micros fired_at = 0;
  };
  struct Executed {
    Micros start = 0;
    std::optional<std::string> resource;
  };
  // (kind, pid, frame id or "").
  using Key = std::tuple<InvalidationKind, int64_t, std::string>;

  std::optional<Pending> Consume(InvalidationKind kind, const Activity& a);

  std::map<Key, Pending> pending_;
  std::map<int64_t, Executed> last_executed_;  // By pid.
};

// Attributes every activity exactly once, walking activities and markers in
// global timestamp order (activities before markers on ties). Output is in
// activity id order.
std::vector<AttributedActivity> AttributeAll(
    const std::vector<Activity>& activities,
    const std::vector<InvalidationMarker>& markers, const CallForest& forest,
    Warnings* warnings);

// Per-thread stack timeline as text: one line per activity, indented by
// depth, with its resource and attribution path.
std::string DumpStackTimeline(const std::vector<AttributedActivity>& attributed,
                              const CallForest& forest);

}  // namespace adlens

#endif  // ADLENS_RESOURCE_MAPPER_H_
