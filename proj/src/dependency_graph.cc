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

#include "adlens/dependency_graph.h"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "adlens/url.h"
#include "json.hpp"

namespace adlens {

namespace {

// Guards against exponential blow-up on dense multi-parent graphs.
constexpr size_t kMaxTreeNodes = 200000;

void AppendUnique(std::vector<std::string>* v, const std::string& s) {
  if (std::find(v->begin(), v->end(), s) == v->end()) v->push_back(s);
}

}  // namespace

ResourceTree BuildGraph(const std::vector<DepEdge>& deps,
                        const std::vector<ResourceRecord>& resources,
                        std::string_view page_url, Warnings* warnings) {
  const std::string root_url(page_url);
  const std::string first_party = RegistrableDomainOfUrl(page_url);

  std::unordered_map<std::string, bool> is_ad;
  for (const ResourceRecord& r : resources) is_ad[r.url] = r.is_ad;

  std::unordered_map<std::string, std::vector<std::string>> children_of;
  std::vector<std::string> known;  // Every non-root URL, first-seen order.
  for (const DepEdge& edge : deps) {
    if (edge.child_url == root_url) continue;
    std::string parent = edge.parent_url.empty() ? root_url : edge.parent_url;
    if (edge.initiator_kind == InitiatorKind::kScript &&
        !edge.initiator_url.empty() && edge.initiator_url != edge.child_url &&
        RegistrableDomainOfUrl(parent) == first_party &&
        RegistrableDomainOfUrl(edge.initiator_url) != first_party) {
      parent = edge.initiator_url;
      warnings->Add("graph.ajax_parent_rewritten");
    }
    AppendUnique(&children_of[parent], edge.child_url);
    if (parent != root_url) AppendUnique(&known, parent);
    AppendUnique(&known, edge.child_url);
  }
  for (const ResourceRecord& r : resources) {
    if (r.from_network && r.url != root_url) AppendUnique(&known, r.url);
  }

  ResourceTree tree;
  auto add_node = [&](const std::string& url, std::optional<size_t> parent) {
    ResourceNode node;
    node.url = url;
    node.domain = RegistrableDomainOfUrl(url);
    node.level = parent ? tree.nodes[*parent].level + 1 : 0;
    if (auto it = is_ad.find(url); it != is_ad.end()) node.is_ad = it->second;
    node.parent = parent;
    tree.nodes.push_back(std::move(node));
    size_t id = tree.nodes.size() - 1;
    if (parent) tree.nodes[*parent].children.push_back(id);
    return id;
  };
  auto on_path = [&tree](size_t node, const std::string& url) {
    for (std::optional<size_t> cur = node; cur; cur = tree.nodes[*cur].parent) {
      if (tree.nodes[*cur].url == url) return true;
    }
    return false;
  };

  std::unordered_set<std::string> placed;
  std::deque<size_t> queue;
  auto expand = [&]() {
    while (!queue.empty()) {
      size_t id = queue.front();
      queue.pop_front();
      auto it = children_of.find(tree.nodes[id].url);
      if (it == children_of.end()) continue;
      for (const std::string& child : it->second) {
        if (on_path(id, child)) {
          warnings->Add("graph.cycle_broken");
          continue;
        }
        if (tree.nodes.size() >= kMaxTreeNodes) {
          warnings->Add("graph.node_limit");
          return;
        }
        placed.insert(child);
        queue.push_back(add_node(child, id));
      }
    }
  };

  placed.insert(root_url);
  queue.push_back(add_node(root_url, std::nullopt));
  expand();
  for (const std::string& url : known) {
    if (placed.count(url)) continue;
    warnings->Add("graph.orphan_attached");
    placed.insert(url);
    queue.push_back(add_node(url, 0));
    expand();
  }
  return tree;
}

DomainGraph CollapseByDomain(const ResourceTree& tree) {
  using Key = std::pair<int, std::string>;  // (level, domain)
  std::map<Key, DomainNode> by_key;
  for (const ResourceNode& n : tree.nodes) {
    DomainNode& d = by_key[{n.level, n.domain}];
    d.domain = n.domain;
    d.level = n.level;
    d.member_urls.push_back(n.url);
    d.is_ad_domain = d.is_ad_domain || n.is_ad;
  }

  DomainGraph graph;
  std::map<Key, size_t> index;
  for (auto& [key, node] : by_key) {
    std::sort(node.member_urls.begin(), node.member_urls.end());
    node.member_urls.erase(
        std::unique(node.member_urls.begin(), node.member_urls.end()),
        node.member_urls.end());
    index[key] = graph.nodes.size();
    graph.nodes.push_back(std::move(node));
  }

  std::map<std::pair<size_t, size_t>, int64_t> weights;
  for (const ResourceNode& n : tree.nodes) {
    if (!n.parent) continue;
    const ResourceNode& p = tree.nodes[*n.parent];
    ++weights[{index[{p.level, p.domain}], index[{n.level, n.domain}]}];
  }
  for (const auto& [edge, weight] : weights) {
    graph.edges.push_back({edge.first, edge.second, weight});
  }
  return graph;
}

ChainDepthStats ComputeChainDepthStats(const ResourceTree& tree) {
  ChainDepthStats stats;
  int64_t sum = 0;
  for (const ResourceNode& n : tree.nodes) {
    if (!n.children.empty()) continue;
    stats.leaf_depths.push_back(n.level);
    stats.max = std::max(stats.max, n.level);
    sum += n.level;
  }
  if (!stats.leaf_depths.empty()) {
    stats.mean = static_cast<double>(sum) /
                 static_cast<double>(stats.leaf_depths.size());
  }
  return stats;
}

namespace {

std::string DotEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string ExportGraph(const DomainGraph& graph, GraphFormat format) {
  if (format == GraphFormat::kJson) {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const DomainNode& n : graph.nodes) {
      nlohmann::ordered_json node;
      node["domain"] = n.domain;
      node["level"] = n.level;
      node["isAdDomain"] = n.is_ad_domain;
      node["memberUrls"] = n.member_urls;
      doc["nodes"].push_back(std::move(node));
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for (const DomainEdge& e : graph.edges) {
      doc["edges"].push_back(
          {{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
    }
    return doc.dump(2) + "\n";
  }

  std::string out = "digraph resources {\n  rankdir=TB;\n  node [shape=box];\n";
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    const DomainNode& n = graph.nodes[i];
    absl::StrAppendFormat(&out,
                          "  n%d [label=\"%s\\nlevel %d (%d)\", color=%s];\n",
                          i, DotEscape(n.domain), n.level, n.member_urls.size(),
                          n.is_ad_domain ? "red" : "blue");
  }
  for (const DomainEdge& e : graph.edges) {
    absl::StrAppendFormat(&out, "  n%d -> n%d", e.from, e.to);
    if (e.weight > 1) absl::StrAppendFormat(&out, " [label=\"%d\"]", e.weight);
    out += ";\n";
  }
  out += "}\n";
  return out;
}

absl::StatusOr<DomainGraph> ImportGraphJson(std::string_view text) {
  nlohmann::json doc =
      nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("nodes") ||
      !doc.contains("edges")) {
    return absl::InvalidArgumentError("not a graph document");
  }
  DomainGraph graph;
  try {
    for (const auto& n : doc["nodes"]) {
      DomainNode node;
      node.domain = n.at("domain").get<std::string>();
      node.level = n.at("level").get<int>();
      node.is_ad_domain = n.at("isAdDomain").get<bool>();
      node.member_urls = n.at("memberUrls").get<std::vector<std::string>>();
      graph.nodes.push_back(std::move(node));
    }
    for (const auto& e : doc["edges"]) {
      DomainEdge edge{e.at("from").get<size_t>(), e.at("to").get<size_t>(),
                      e.at("weight").get<int64_t>()};
      if (edge.from >= graph.nodes.size() || edge.to >= graph.nodes.size()) {
        return absl::InvalidArgumentError("edge references a missing node");
      }
      graph.edges.push_back(edge);
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad graph: ", e.what()));
  }
  return graph;
}

}  // namespace adlens
