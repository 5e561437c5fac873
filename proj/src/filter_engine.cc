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

#include "adlens/filter_engine.h"

#include <algorithm>
#include <map>

#include "absl/strings/ascii.h"
#include "absl/strings/match.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "adlens/strings.h"
#include "adlens/url.h"

namespace adlens {

namespace {

bool IsTokenChar(char c) {
  return absl::ascii_isalnum(static_cast<unsigned char>(c)) || c == '%';
}

// '^' matches anything but a letter, a digit, or one of "_-.%".
bool IsSeparator(char c) {
  if (static_cast<unsigned char>(c) >= 0x80) return false;
  return !(absl::ascii_isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '-' || c == '.' || c == '%');
}

const std::map<std::string_view, uint32_t>& TypeOptionNames() {
  static const auto* names = new std::map<std::string_view, uint32_t>{
      {"script", kTypeScript},
      {"image", kTypeImage},
      {"stylesheet", kTypeStylesheet},
      {"xmlhttprequest", kTypeXmlHttpRequest},
      {"subdocument", kTypeSubdocument},
      {"media", kTypeMedia},
      {"font", kTypeFont},
      {"object", kTypeObject},
      {"other", kTypeOther},
  };
  return *names;
}

// Matches `segment` at `pos`; returns the end offset. Characters before
// `host_end` (scheme and authority) compare case-insensitively.
std::optional<size_t> SegmentAt(std::string_view segment, std::string_view url,
                                size_t pos, size_t host_end) {
  size_t i = pos;
  for (char pc : segment) {
    if (pc == '^') {
      if (i == url.size()) continue;
      if (!IsSeparator(url[i])) return std::nullopt;
      ++i;
      continue;
    }
    if (i == url.size()) return std::nullopt;
    char uc = url[i];
    if (i < host_end) {
      if (absl::ascii_tolower(static_cast<unsigned char>(pc)) !=
          absl::ascii_tolower(static_cast<unsigned char>(uc))) {
        return std::nullopt;
      }
    } else if (pc != uc) {
      return std::nullopt;
    }
    ++i;
  }
  return i;
}

bool MatchesFrom(const FilterRule& rule, std::string_view url, size_t start,
                 size_t host_end) {
  const std::vector<std::string>& segs = rule.segments;
  std::optional<size_t> end = SegmentAt(segs[0], url, start, host_end);
  if (!end) return false;
  size_t cur = *end;
  if (segs.size() == 1) return !rule.anchor_end || cur == url.size();
  for (size_t k = 1; k < segs.size(); ++k) {
    const bool last = k + 1 == segs.size();
    bool found = false;
    for (size_t p = cur; p <= url.size(); ++p) {
      std::optional<size_t> e = SegmentAt(segs[k], url, p, host_end);
      if (!e) continue;
      if (last && rule.anchor_end && *e != url.size()) continue;
      cur = *e;
      found = true;
      break;
    }
    if (!found) return false;
  }
  return true;
}

bool PatternMatches(const FilterRule& rule, std::string_view url) {
  std::optional<UrlParts> parts = SplitUrl(url);
  const size_t host_begin = parts ? parts->host_begin : 0;
  const size_t host_end = parts ? parts->host_end : 0;
  if (rule.anchor_start) return MatchesFrom(rule, url, 0, host_end);
  if (rule.domain_anchor) {
    if (!parts) return false;
    for (size_t p = host_begin; p < host_end; ++p) {
      if (p != host_begin && url[p - 1] != '.') continue;
      if (MatchesFrom(rule, url, p, host_end)) return true;
    }
    return false;
  }
  for (size_t p = 0; p <= url.size(); ++p) {
    if (MatchesFrom(rule, url, p, host_end)) return true;
  }
  return false;
}

// Most specific listed domain wins; with no listed match the rule applies
// only if it names no included domains.
bool DomainOptionAllows(const FilterRule& rule, std::string_view page_host) {
  if (rule.include_domains.empty() && rule.exclude_domains.empty()) {
    return true;
  }
  std::vector<std::string_view> labels = StrSplit(page_host, '.');
  const size_t stop = labels.size() == 1 ? 1 : labels.size() - 1;
  for (size_t i = 0; i < stop; ++i) {
    std::string variant = absl::StrJoin(
        labels.begin() + i, labels.end(), ".",
        [](std::string* out, std::string_view label) { out->append(label); });
    if (std::find(rule.include_domains.begin(), rule.include_domains.end(),
                  variant) != rule.include_domains.end()) {
      return true;
    }
    if (std::find(rule.exclude_domains.begin(), rule.exclude_domains.end(),
                  variant) != rule.exclude_domains.end()) {
      return false;
    }
  }
  return rule.include_domains.empty();
}

// Longest run of token characters whose neighbours in the pattern are
// literal non-token characters or anchors, so that it must appear as a whole
// token in any matching URL.
std::optional<std::string> IndexToken(const FilterRule& rule) {
  const std::string& p = rule.pattern;
  std::optional<std::string> best;
  size_t i = 0;
  while (i < p.size()) {
    if (!IsTokenChar(p[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < p.size() && IsTokenChar(p[j])) ++j;
    bool left_ok =
        i == 0 ? (rule.anchor_start || rule.domain_anchor) : p[i - 1] != '*';
    bool right_ok = j == p.size() ? rule.anchor_end : p[j] != '*';
    if (left_ok && right_ok && (!best || j - i > best->size())) {
      best = AsciiStrToLower(p.substr(i, j - i));
    }
    i = j;
  }
  return best;
}

}  // namespace

uint32_t TypeOptionFor(ContentType type) {
  switch (type) {
    case ContentType::kScript:
      return kTypeScript;
    case ContentType::kHtml:
      return kTypeSubdocument;
    case ContentType::kImage:
      return kTypeImage;
    case ContentType::kFont:
      return kTypeFont;
    case ContentType::kCss:
      return kTypeStylesheet;
    case ContentType::kXml:
    case ContentType::kXhr:
      return kTypeXmlHttpRequest;
    case ContentType::kMedia:
      return kTypeMedia;
    case ContentType::kUnknown:
      return kTypeOther;
  }
  return kTypeOther;
}

std::optional<FilterRule> ParseRule(std::string_view line,
                                    std::string* drop_reason) {
  auto drop = [drop_reason](const char* reason) -> std::optional<FilterRule> {
    if (drop_reason) *drop_reason = reason;
    return std::nullopt;
  };
  std::string_view text = StripAsciiWhitespace(line);
  if (text.empty()) return drop("filters.blank");
  if (text.front() == '!' || text.front() == '[')
    return drop("filters.comment");
  for (std::string_view marker : {"##", "#@#", "#?#", "#$#", "#@?#", "#@$#"}) {
    if (StrContains(text, marker)) return drop("filters.cosmetic");
  }

  FilterRule rule;
  rule.raw = std::string(text);
  if (ConsumePrefix(&text, "@@")) rule.is_exception = true;

  std::string_view options;
  if (size_t dollar = text.rfind('$'); dollar != std::string_view::npos) {
    options = text.substr(dollar + 1);
    text = text.substr(0, dollar);
  }
  if (text.size() > 1 && text.front() == '/' && text.back() == '/') {
    return drop("filters.regex");
  }

  if (!options.empty()) {
    for (std::string_view opt : StrSplit(options, ',')) {
      std::string lowered = AsciiStrToLower(opt);
      std::string_view name = lowered;
      if (ConsumePrefix(&name, "domain=")) {
        for (std::string_view d : StrSplit(name, '|', /*skip_empty=*/true)) {
          if (ConsumePrefix(&d, "~")) {
            rule.exclude_domains.emplace_back(d);
          } else {
            rule.include_domains.emplace_back(d);
          }
        }
        continue;
      }
      const bool negated = ConsumePrefix(&name, "~");
      if (name == "third-party") {
        rule.third_party = !negated;
        continue;
      }
      auto type = TypeOptionNames().find(name);
      if (type == TypeOptionNames().end()) {
        return drop("filters.unsupported_option");
      }
      (negated ? rule.exclude_types : rule.include_types) |= type->second;
    }
  }

  if (ConsumePrefix(&text, "||")) {
    rule.domain_anchor = true;
  } else if (ConsumePrefix(&text, "|")) {
    rule.anchor_start = true;
  }
  if (ConsumeSuffix(&text, "|")) rule.anchor_end = true;
  if (text.empty()) return drop("filters.invalid");

  // Runs of '*' are equivalent to one.
  for (char c : text) {
    if (c == '*' && !rule.pattern.empty() && rule.pattern.back() == '*') {
      continue;
    }
    rule.pattern.push_back(c);
  }
  for (std::string_view seg : StrSplit(rule.pattern, '*')) {
    rule.segments.emplace_back(seg);
  }
  return rule;
}

MatchContext MakeMatchContext(std::string_view url, ContentType type,
                              std::string_view page_url) {
  MatchContext ctx;
  ctx.url = std::string(url);
  ctx.content_type = type;
  ctx.page_host = HostOf(page_url);
  ctx.page_domain =
      PublicSuffixList::Default().RegistrableDomain(ctx.page_host);
  ctx.request_domain = RegistrableDomainOfUrl(url);
  return ctx;
}

bool RuleMatches(const FilterRule& rule, const MatchContext& ctx) {
  const uint32_t type = TypeOptionFor(ctx.content_type);
  if (rule.include_types != 0 && (rule.include_types & type) == 0) {
    return false;
  }
  if ((rule.exclude_types & type) != 0) return false;
  if (rule.third_party && *rule.third_party != ctx.third_party()) return false;
  if (!DomainOptionAllows(rule, ctx.page_host)) return false;
  return PatternMatches(rule, ctx.url);
}

void RuleSet::AddToIndex(const FilterRule& rule, int32_t id, Index* index) {
  if (std::optional<std::string> token = IndexToken(rule)) {
    index->by_token[*token].push_back(id);
  } else {
    index->untokenized.push_back(id);
  }
}

void RuleSet::Append(std::string_view text) {
  for (std::string_view line : StrSplit(text, '\n')) {
    std::string reason;
    std::optional<FilterRule> rule = ParseRule(line, &reason);
    if (!rule) {
      if (reason != "filters.blank") stats_.dropped.Add(reason);
      continue;
    }
    if (rule->is_exception) {
      AddToIndex(*rule, static_cast<int32_t>(exceptions_.size()),
                 &exception_index_);
      exceptions_.push_back(*std::move(rule));
      ++stats_.exceptions;
    } else {
      AddToIndex(*rule, static_cast<int32_t>(blocking_.size()),
                 &blocking_index_);
      blocking_.push_back(*std::move(rule));
      ++stats_.blocking;
    }
  }
}

RuleSet RuleSet::Parse(std::string_view text) {
  RuleSet set;
  set.Append(text);
  return set;
}

std::optional<int32_t> RuleSet::FirstMatch(
    const std::vector<FilterRule>& rules, const Index& index,
    const std::vector<std::string>& tokens, const MatchContext& ctx) {
  std::vector<int32_t> candidates = index.untokenized;
  for (const std::string& token : tokens) {
    auto it = index.by_token.find(token);
    if (it == index.by_token.end()) continue;
    candidates.insert(candidates.end(), it->second.begin(), it->second.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  for (int32_t id : candidates) {
    if (RuleMatches(rules[id], ctx)) return id;
  }
  return std::nullopt;
}

MatchResult RuleSet::Match(const MatchContext& ctx) const {
  if (blocking_.empty()) return {};
  std::vector<std::string> tokens = UrlTokens(ctx.url);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  std::optional<int32_t> block =
      FirstMatch(blocking_, blocking_index_, tokens, ctx);
  if (!block) return {};
  if (std::optional<int32_t> allow =
          FirstMatch(exceptions_, exception_index_, tokens, ctx)) {
    return {false, exceptions_[*allow].raw};
  }
  return {true, blocking_[*block].raw};
}

MatchResult RuleSet::MatchNaive(const MatchContext& ctx) const {
  const FilterRule* block = nullptr;
  for (const FilterRule& rule : blocking_) {
    if (RuleMatches(rule, ctx)) {
      block = &rule;
      break;
    }
  }
  if (block == nullptr) return {};
  for (const FilterRule& rule : exceptions_) {
    if (RuleMatches(rule, ctx)) return {false, rule.raw};
  }
  return {true, block->raw};
}

MatchResult MatchUrl(const MatchContext& ctx, const RuleSet& rules) {
  return rules.Match(ctx);
}

std::vector<ResourceRecord> ClassifyResources(
    const std::vector<NetworkRequest>& net, const RuleSet& rules,
    std::string_view page_url) {
  std::vector<ResourceRecord> out;
  std::unordered_map<std::string, size_t> by_url;
  for (const NetworkRequest& r : net) {
    auto [it, inserted] = by_url.try_emplace(r.url, out.size());
    if (inserted) {
      MatchResult match =
          rules.Match(MakeMatchContext(r.url, r.content_type, page_url));
      ResourceRecord rec;
      rec.url = r.url;
      rec.domain = RegistrableDomainOfUrl(r.url);
      rec.content_type = r.content_type;
      rec.is_ad = match.is_ad;
      rec.matched_rule = match.is_ad ? match.matched_rule : std::nullopt;
      out.push_back(std::move(rec));
    }
    ResourceRecord& rec = out[it->second];
    rec.intervals.push_back({r.start_time, r.end_time});
    rec.request_ids.push_back(r.request_id);
  }
  return out;
}

std::vector<std::string> UrlTokens(std::string_view url) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < url.size()) {
    if (!IsTokenChar(url[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < url.size() && IsTokenChar(url[j])) ++j;
    tokens.push_back(AsciiStrToLower(url.substr(i, j - i)));
    i = j;
  }
  return tokens;
}

std::string FilterListFingerprint(const std::vector<std::string>& texts) {
  uint64_t hash = 14695981039346656037ull;
  auto mix = [&hash](unsigned char c) {
    hash ^= c;
    hash *= 1099511628211ull;
  };
  for (const std::string& text : texts) {
    for (char c : text) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return absl::StrFormat("fnv1a64:%016x", hash);
}

}  // namespace adlens
