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

#ifndef ADLENS_DEPENDENCY_GRAPH_H_
#define ADLENS_DEPENDENCY_GRAPH_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "adlens/common.h"
#include "adlens/filter_engine.h"
#include "adlens/trace_ingest.h"

namespace adlens {

struct ResourceNode {
  std::string url;
  std::string domain;
  int level = 0;
  bool is_ad = false;
  std::optional<size_t> parent;
  std::vector<size_t> children;
};

// Resource dependency tree rooted at the publisher page (nodes[0]). A URL
// requested from two places appears once under each parent.
struct ResourceTree {
  std::vector<ResourceNode> nodes;
};

// Builds the tree from child->parent edges.
//
// A request issued by a third-party script but recorded with the first-party
// page as its parent is re-parented to that script (taken from the edge's
// initiatorUrl). Edges that would close a cycle are dropped
// ("graph.cycle_broken"); resources unreachable from the root hang off the
// root ("graph.orphan_attached").
ResourceTree BuildGraph(const std::vector<DepEdge>& deps,
                        const std::vector<ResourceRecord>& resources,
                        std::string_view page_url, Warnings* warnings);

struct DomainNode {
  std::string domain;
  int level = 0;
  std::vector<std::string> member_urls;  // Sorted, unique.
  bool is_ad_domain = false;

  bool operator==(const DomainNode&) const = default;
};

struct DomainEdge {
  size_t from = 0;
  size_t to = 0;
  int64_t weight = 0;  // Number of resource edges collapsed into this one.

  bool operator==(const DomainEdge&) const = default;
};

// Nodes ordered by (level, domain); edges by (from, to).
struct DomainGraph {
  std::vector<DomainNode> nodes;
  std::vector<DomainEdge> edges;

  bool operator==(const DomainGraph&) const = default;
};

// One node per (registrable domain, level). A domain node is an ad node when
// at least one of its resources is an ad.
DomainGraph CollapseByDomain(const ResourceTree& tree);

struct ChainDepthStats {
  double mean = 0;
  int max = 0;
  std::vector<int> leaf_depths;  // In node order.
};

ChainDepthStats ComputeChainDepthStats(const ResourceTree& tree);

enum class GraphFormat { kDot, kJson };

// Deterministic rendering; ad nodes are red in dot output.
std::string ExportGraph(const DomainGraph& graph, GraphFormat format);

// Reads the kJson form back.
absl::StatusOr<DomainGraph> ImportGraphJson(std::string_view text);

}  // namespace adlens

#endif  // ADLENS_DEPENDENCY_GRAPH_H_
