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

#include "adlens/resource_mapper.h"

#include <algorithm>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "adlens/strings.h"

namespace adlens {

CallForest BuildCallStacks(std::vector<Activity>* activities,
                           Warnings* warnings) {
  std::vector<Activity>& acts = *activities;
  CallForest forest;
  forest.nodes.resize(acts.size());

  std::map<std::pair<int64_t, int64_t>, std::vector<int64_t>> threads;
  for (const Activity& a : acts) {
    forest.nodes[a.id].activity_id = a.id;
    threads[{a.pid, a.tid}].push_back(a.id);
  }

  for (auto& [thread, ids] : threads) {
    std::stable_sort(ids.begin(), ids.end(), [&](int64_t x, int64_t y) {
      const Activity& a = acts[x];
      const Activity& b = acts[y];
      if (a.start != b.start) return a.start < b.start;
      return a.duration() > b.duration();
    });
    std::vector<int64_t> stack;
    for (int64_t id : ids) {
      Activity& a = acts[id];
      while (!stack.empty()) {
        const Activity& top = acts[stack.back()];
        if (a.end <= top.end) break;
        if (a.start < top.end) {
          a.end = top.end;
          warnings->Add("stack.overlap_truncated");
          break;
        }
        stack.pop_back();
      }
      StackNode& node = forest.nodes[id];
      if (stack.empty()) {
        forest.roots.push_back(id);
      } else {
        node.parent_id = stack.back();
        node.depth = forest.nodes[stack.back()].depth + 1;
        forest.nodes[stack.back()].child_ids.push_back(id);
      }
      stack.push_back(id);
    }
  }

  for (Activity& a : acts) {
    Micros nested = 0;
    for (int64_t child : forest.nodes[a.id].child_ids) {
      nested += acts[child].duration();
    }
    a.self_time = a.duration() - nested;
  }
  return forest;
}

AttributionGroup GroupOf(const Activity& a) {
  switch (a.stage) {
    case Stage::kHtmlParsing:
    case Stage::kScripting:
      return AttributionGroup::kParsingAndEvaluation;
    case Stage::kStyling:
      return a.name == "ParseAuthorStyleSheet"
                 ? AttributionGroup::kParsingAndEvaluation
                 : AttributionGroup::kTreeManipulationAndRendering;
    case Stage::kLayout:
    case Stage::kComposite:
    case Stage::kPaint:
      return AttributionGroup::kTreeManipulationAndRendering;
  }
  return AttributionGroup::kTreeManipulationAndRendering;
}

std::string_view AttributionPathName(AttributionPath path) {
  switch (path) {
    case AttributionPath::kExplicitArgs:
      return "ExplicitArgs";
    case AttributionPath::kAncestorInheritance:
      return "AncestorInheritance";
    case AttributionPath::kInvalidationInitiator:
      return "InvalidationInitiator";
    case AttributionPath::kRenderChain:
      return "RenderChain";
    case AttributionPath::kUnattributed:
      return "Unattributed";
  }
  return "Unattributed";
}

std::optional<std::string> AttributeExplicit(const Activity& a) {
  return a.resource_hint;
}

std::optional<std::string> AttributeByAncestor(
    const Activity& a, const CallForest& forest,
    const std::unordered_map<int64_t, std::string>& resolved) {
  std::optional<int64_t> cursor = forest.node(a.id).parent_id;
  while (cursor) {
    if (auto it = resolved.find(*cursor); it != resolved.end()) {
      return it->second;
    }
    cursor = forest.node(*cursor).parent_id;
  }
  return std::nullopt;
}

void RenderAttributor::OnMarker(const InvalidationMarker& marker,
                                std::optional<std::string> initiator) {
  Key key{marker.kind, marker.pid, marker.frame_id.value_or("")};
  // try_emplace keeps the first firing.
  pending_.try_emplace(std::move(key),
                       Pending{std::move(initiator), marker.ts});
}

std::optional<RenderAttributor::Pending> RenderAttributor::Consume(
    InvalidationKind kind, const Activity& a) {
  auto take = [this](std::map<Key, Pending>::iterator it) {
    Pending p = std::move(it->second);
    pending_.erase(it);
    return p;
  };
  if (a.frame_id) {
    for (const std::string& frame : {*a.frame_id, std::string()}) {
      if (auto it = pending_.find(Key{kind, a.pid, frame});
          it != pending_.end()) {
        return take(it);
      }
    }
    return std::nullopt;
  }
  // No frame on the activity: the earliest pending entry in its renderer.
  auto best = pending_.end();
  for (auto it = pending_.lower_bound(Key{kind, a.pid, ""});
       it != pending_.end() && std::get<0>(it->first) == kind &&
       std::get<1>(it->first) == a.pid;
       ++it) {
    if (best == pending_.end() || it->second.fired_at < best->second.fired_at) {
      best = it;
    }
  }
  if (best == pending_.end()) return std::nullopt;
  return take(best);
}

RenderAttributor::Result RenderAttributor::Attribute(const Activity& a) {
  Result result;
  switch (a.stage) {
    case Stage::kStyling:
    case Stage::kLayout: {
      InvalidationKind kind = a.stage == Stage::kStyling
                                  ? InvalidationKind::kStyleRecalc
                                  : InvalidationKind::kLayoutInvalidate;
      if (std::optional<Pending> p = Consume(kind, a)) {
        if (p->initiator) {
          result.resource = std::move(p->initiator);
          result.path = AttributionPath::kInvalidationInitiator;
        } else {
          result.consumed_unknown = true;
        }
      }
      break;
    }
    case Stage::kComposite:
    case Stage::kPaint: {
      auto it = last_executed_.find(a.pid);
      if (it != last_executed_.end() && it->second.start <= a.start &&
          it->second.resource) {
        result.resource = it->second.resource;
        result.path = AttributionPath::kRenderChain;
      }
      break;
    }
    default:
      break;
  }
  return result;
}

void RenderAttributor::RecordExecuted(
    const Activity& a, const std::optional<std::string>& resource) {
  if (a.stage != Stage::kStyling && a.stage != Stage::kLayout) return;
  Executed& last = last_executed_[a.pid];
  if (a.start >= last.start) last = Executed{a.start, resource};
}

namespace {

// Resource of the innermost activity enclosing `ts`, starting from the last
// activity that began on the marker's thread.
std::optional<std::string> EnclosingResource(
    std::optional<int64_t> last_started, Micros ts,
    const std::vector<Activity>& activities, const CallForest& forest,
    const std::unordered_map<int64_t, std::string>& resolved) {
  std::optional<int64_t> cursor = last_started;
  while (cursor) {
    const Activity& a = activities[*cursor];
    if (a.start <= ts && ts <= a.end) {
      if (auto it = resolved.find(*cursor); it != resolved.end()) {
        return it->second;
      }
    }
    cursor = forest.node(*cursor).parent_id;
  }
  return std::nullopt;
}

}  // namespace

std::vector<AttributedActivity> AttributeAll(
    const std::vector<Activity>& activities,
    const std::vector<InvalidationMarker>& markers, const CallForest& forest,
    Warnings* warnings) {
  // Global order: (ts, activities before markers, longer first, id).
  struct Item {
    Micros ts;
    int kind;  // 0 activity, 1 marker
    Micros neg_dur;
    int64_t index;
  };
  std::vector<Item> order;
  order.reserve(activities.size() + markers.size());
  for (const Activity& a : activities) {
    order.push_back({a.start, 0, -a.duration(), a.id});
  }
  for (size_t i = 0; i < markers.size(); ++i) {
    order.push_back({markers[i].ts, 1, 0, static_cast<int64_t>(i)});
  }
  std::sort(order.begin(), order.end(), [](const Item& x, const Item& y) {
    return std::tie(x.ts, x.kind, x.neg_dur, x.index) <
           std::tie(y.ts, y.kind, y.neg_dur, y.index);
  });

  std::vector<AttributedActivity> out(activities.size());
  std::unordered_map<int64_t, std::string> resolved;
  std::map<std::pair<int64_t, int64_t>, int64_t> last_started;
  RenderAttributor render;

  for (const Item& item : order) {
    if (item.kind == 1) {
      const InvalidationMarker& m = markers[item.index];
      std::optional<std::string> initiator = m.resource_hint;
      if (!initiator) {
        auto it = last_started.find({m.pid, m.tid});
        initiator = EnclosingResource(it == last_started.end()
                                          ? std::nullopt
                                          : std::optional<int64_t>(it->second),
                                      m.ts, activities, forest, resolved);
      }
      if (!initiator) warnings->Add("mapper.marker_without_initiator");
      render.OnMarker(m, std::move(initiator));
      continue;
    }

    const Activity& a = activities[item.index];
    last_started[{a.pid, a.tid}] = a.id;
    AttributedActivity& rec = out[a.id];
    rec.activity = a;

    if (GroupOf(a) == AttributionGroup::kParsingAndEvaluation) {
      if (std::optional<std::string> url = AttributeExplicit(a)) {
        rec.resource = std::move(url);
        rec.path = AttributionPath::kExplicitArgs;
      } else if (std::optional<std::string> inherited =
                     AttributeByAncestor(a, forest, resolved)) {
        rec.resource = std::move(inherited);
        rec.path = AttributionPath::kAncestorInheritance;
      }
    } else {
      RenderAttributor::Result r = render.Attribute(a);
      if (r.resource) {
        rec.resource = std::move(r.resource);
        rec.path = r.path;
      } else if (a.stage == Stage::kStyling || a.stage == Stage::kLayout) {
        // Browser-initiated work (e.g. the initial layout) has no pending
        // invalidation; inherit from the stack when possible.
        if (std::optional<std::string> inherited =
                AttributeByAncestor(a, forest, resolved)) {
          rec.resource = std::move(inherited);
          rec.path = AttributionPath::kAncestorInheritance;
        }
      }
      render.RecordExecuted(a, rec.resource);
    }

    if (rec.resource) {
      resolved.emplace(a.id, *rec.resource);
    } else {
      rec.path = AttributionPath::kUnattributed;
      warnings->Add("mapper.unattributed");
    }
  }
  return out;
}

std::string DumpStackTimeline(const std::vector<AttributedActivity>& attributed,
                              const CallForest& forest) {
  std::map<std::pair<int64_t, int64_t>, std::vector<int64_t>> threads;
  for (const AttributedActivity& rec : attributed) {
    threads[{rec.activity.pid, rec.activity.tid}].push_back(rec.activity.id);
  }
  std::string out;
  for (auto& [thread, ids] : threads) {
    std::stable_sort(ids.begin(), ids.end(), [&](int64_t x, int64_t y) {
      const Activity& a = attributed[x].activity;
      const Activity& b = attributed[y].activity;
      if (a.start != b.start) return a.start < b.start;
      return a.duration() > b.duration();
    });
    absl::StrAppend(&out, "thread ", thread.first, ":", thread.second, "\n");
    for (int64_t id : ids) {
      const AttributedActivity& rec = attributed[id];
      const Activity& a = rec.activity;
      absl::StrAppend(&out, std::string(2 * (forest.node(id).depth + 1), ' '),
                      a.name, " [", a.start, ", ", a.end, "] ",
                      ToAbsl(StageName(a.stage)), " self=", a.self_time, " ",
                      rec.resource.value_or("-"), " ",
                      ToAbsl(AttributionPathName(rec.path)), "\n");
    }
  }
  return out;
}

}  // namespace adlens
