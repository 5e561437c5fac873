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

// Adblock-syntax URL filter rules (EasyList compatible network rules).
//
// Supported: "||" domain anchors, "|" start/end anchors, "*" wildcards, "^"
// separators, "@@" exceptions, content-type options (optionally negated),
// third-party / ~third-party and domain=. Cosmetic rules, regex rules and
// rules carrying any other option are dropped and counted.

#ifndef ADLENS_FILTER_ENGINE_H_
#define ADLENS_FILTER_ENGINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adlens/common.h"
#include "adlens/trace_ingest.h"

namespace adlens {

// Request-type option bits.
enum TypeOption : uint32_t {
  kTypeScript = 1u << 0,
  kTypeImage = 1u << 1,
  kTypeStylesheet = 1u << 2,
  kTypeXmlHttpRequest = 1u << 3,
  kTypeSubdocument = 1u << 4,
  kTypeMedia = 1u << 5,
  kTypeFont = 1u << 6,
  kTypeObject = 1u << 7,
  kTypeOther = 1u << 8,
};

// The option bit a resource of `type` is filtered as.
uint32_t TypeOptionFor(ContentType type);

struct FilterRule {
  std::string raw;
  // Pattern body with anchors and options stripped.
  std::string pattern;
  bool anchor_start = false;
  bool anchor_end = false;
  bool domain_anchor = false;
  bool is_exception = false;
  // When non-zero, the rule only applies to these request types.
  uint32_t include_types = 0;
  uint32_t exclude_types = 0;
  // true: third-party only; false: first-party only.
  std::optional<bool> third_party;
  std::vector<std::string> include_domains;
  std::vector<std::string> exclude_domains;
  // `pattern` split on '*'.
  std::vector<std::string> segments;
};

// Parses one line. Returns nullopt for comments, cosmetic and unsupported
// rules; `drop_reason` (if given) receives the warning code.
std::optional<FilterRule> ParseRule(std::string_view line,
                                    std::string* drop_reason = nullptr);

struct MatchContext {
  std::string url;
  ContentType content_type = ContentType::kUnknown;
  std::string page_host;
  std::string page_domain;
  std::string request_domain;

  bool third_party() const { return page_domain != request_domain; }
};

MatchContext MakeMatchContext(std::string_view url, ContentType type,
                              std::string_view page_url);

// True when the rule's pattern and options accept the request.
bool RuleMatches(const FilterRule& rule, const MatchContext& ctx);

struct MatchResult {
  bool is_ad = false;
  // The deciding rule: the blocking rule when is_ad, the exception rule when
  // a block was overridden, nothing otherwise.
  std::optional<std::string> matched_rule;

  bool operator==(const MatchResult&) const = default;
};

struct RuleSetStats {
  int64_t blocking = 0;
  int64_t exceptions = 0;
  // Drop reasons, e.g. "filters.cosmetic", "filters.regex".
  Warnings dropped;
};

// Immutable after construction; safe for concurrent matching.
class RuleSet {
 public:
  RuleSet() = default;

  // Parses list text; later calls append, so rule order follows input order.
  void Append(std::string_view text);
  static RuleSet Parse(std::string_view text);

  // Token-indexed matcher.
  MatchResult Match(const MatchContext& ctx) const;
  // Scans every rule in order. Same answer as Match().
  MatchResult MatchNaive(const MatchContext& ctx) const;

  const std::vector<FilterRule>& blocking() const { return blocking_; }
  const std::vector<FilterRule>& exceptions() const { return exceptions_; }
  const RuleSetStats& stats() const { return stats_; }
  bool empty() const { return blocking_.empty(); }

 private:
  struct Index {
    std::unordered_map<std::string, std::vector<int32_t>> by_token;
    std::vector<int32_t> untokenized;
  };

  static void AddToIndex(const FilterRule& rule, int32_t id, Index* index);
  static std::optional<int32_t> FirstMatch(
      const std::vector<FilterRule>& rules, const Index& index,
      const std::vector<std::string>& tokens, const MatchContext& ctx);

  std::vector<FilterRule> blocking_;
  std::vector<FilterRule> exceptions_;
  Index blocking_index_;
  Index exception_index_;
  RuleSetStats stats_;
};

MatchResult MatchUrl(const MatchContext& ctx, const RuleSet& rules);

// One fetched document; all requests for the same URL are folded into one
// record with one interval per request.
struct ResourceRecord {
  std::string url;
  std::string domain;
  ContentType content_type = ContentType::kUnknown;
  bool is_ad = false;
  std::optional<std::string> matched_rule;
  std::vector<TimeRange> intervals;
  std::vector<std::string> request_ids;
  // False for URLs that only appear in trace attribution (e.g. inline
  // documents); those carry no network time.
  bool from_network = true;
};

// Records in first-appearance order.
std::vector<ResourceRecord> ClassifyResources(
    const std::vector<NetworkRequest>& net, const RuleSet& rules,
    std::string_view page_url);

// Lower-cased maximal runs of [a-z0-9%].
std::vector<std::string> UrlTokens(std::string_view url);

// Stable fingerprint of filter list contents, "fnv1a64:<hex>".
std::string FilterListFingerprint(const std::vector<std::string>& texts);

}  // namespace adlens

#endif  // ADLENS_FILTER_ENGINE_H_
