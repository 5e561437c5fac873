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

#include "adlens/url.h"

#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "adlens/strings.h"

namespace adlens {

// Generated at configure time from data/public_suffix_list.dat.
extern const char kPublicSuffixListData[];

namespace {

bool IsSchemeChar(char c) {
  return absl::ascii_isalnum(static_cast<unsigned char>(c)) || c == '+' ||
         c == '-' || c == '.';
}

bool LooksLikeIpLiteral(std::string_view host) {
  if (!host.empty() && host.front() == '[') return true;
  for (char c : host) {
    if (!absl::ascii_isdigit(static_cast<unsigned char>(c)) && c != '.') {
      return false;
    }
  }
  return true;
}

}  // namespace

std::optional<UrlParts> SplitUrl(std::string_view url) {
  size_t colon = url.find(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  if (!absl::ascii_isalpha(static_cast<unsigned char>(url[0]))) {
    return std::nullopt;
  }
  for (size_t i = 0; i < colon; ++i) {
    if (!IsSchemeChar(url[i])) return std::nullopt;
  }
  if (url.substr(colon + 1, 2) != "//") return std::nullopt;
  size_t authority_begin = colon + 3;
  size_t authority_end = url.find_first_of("/?#", authority_begin);
  if (authority_end == std::string_view::npos) authority_end = url.size();
  std::string_view authority =
      url.substr(authority_begin, authority_end - authority_begin);

  size_t host_begin = authority_begin;
  if (size_t at = authority.rfind('@'); at != std::string_view::npos) {
    host_begin += at + 1;
  }
  size_t host_end = authority_end;
  std::string_view host_and_port =
      url.substr(host_begin, authority_end - host_begin);
  if (!host_and_port.empty() && host_and_port.front() == '[') {
    size_t close = host_and_port.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host_end = host_begin + close + 1;
  } else if (size_t port = host_and_port.rfind(':');
             port != std::string_view::npos) {
    host_end = host_begin + port;
  }
  if (host_end == host_begin) return std::nullopt;

  UrlParts parts;
  parts.scheme = url.substr(0, colon);
  parts.host_begin = host_begin;
  parts.host_end = host_end;
  parts.host = url.substr(host_begin, host_end - host_begin);
  return parts;
}

std::optional<std::string> NormalizeUrl(std::string_view url) {
  std::optional<UrlParts> parts = SplitUrl(url);
  if (!parts) return std::nullopt;
  std::string out(url.substr(0, url.find('#')));
  for (size_t i = 0; i < parts->scheme.size(); ++i) {
    out[i] = absl::ascii_tolower(static_cast<unsigned char>(out[i]));
  }
  for (size_t i = parts->host_begin; i < parts->host_end && i < out.size();
       ++i) {
    out[i] = absl::ascii_tolower(static_cast<unsigned char>(out[i]));
  }
  return out;
}

std::string HostOf(std::string_view url) {
  std::optional<UrlParts> parts = SplitUrl(url);
  if (!parts) return "";
  return AsciiStrToLower(parts->host);
}

PublicSuffixList PublicSuffixList::FromText(std::string_view text) {
  PublicSuffixList list;
  for (std::string_view line : StrSplit(text, '\n')) {
    line = StripAsciiWhitespace(line);
    if (line.find("===BEGIN PRIVATE DOMAINS===") != std::string_view::npos) {
      break;
    }
    if (line.empty() || StartsWith(line, "//")) continue;
    // A rule ends at the first whitespace.
    line = line.substr(0, line.find_first_of(" \t"));
    std::string rule = AsciiStrToLower(line);
    if (StartsWith(rule, "!")) {
      list.exceptions_.insert(rule.substr(1));
    } else if (StartsWith(rule, "*.")) {
      list.wildcards_.insert(rule.substr(2));
    } else {
      list.rules_.insert(std::move(rule));
    }
  }
  return list;
}

const PublicSuffixList& PublicSuffixList::Default() {
  static const PublicSuffixList* list =
      new PublicSuffixList(FromText(kPublicSuffixListData));
  return *list;
}

std::string PublicSuffixList::RegistrableDomain(std::string_view host) const {
  std::string lowered = AsciiStrToLower(StripSuffix(host, "."));
  if (lowered.empty() || LooksLikeIpLiteral(lowered)) return lowered;
  std::vector<std::string_view> labels = StrSplit(lowered, '.');
  const size_t n = labels.size();
  if (n == 1) return lowered;

  auto join_from = [&labels](size_t i) {
    return absl::StrJoin(
        labels.begin() + i, labels.end(), ".",
        [](std::string* out, std::string_view label) { out->append(label); });
  };

  // Longest matching suffix rule; the implicit "*" rule is the fallback.
  size_t suffix_start = n - 1;
  for (size_t i = 0; i < n; ++i) {
    std::string candidate = join_from(i);
    if (exceptions_.count(candidate)) {
      suffix_start = i + 1;
      break;
    }
    if (rules_.count(candidate) ||
        (i + 1 < n && wildcards_.count(join_from(i + 1)))) {
      suffix_start = i;
      break;
    }
  }
  if (suffix_start == 0) return lowered;
  return join_from(suffix_start - 1);
}

std::string RegistrableDomainOfUrl(std::string_view url) {
  std::optional<UrlParts> parts = SplitUrl(url);
  if (!parts) return "";
  return PublicSuffixList::Default().RegistrableDomain(parts->host);
}

}  // namespace adlens
