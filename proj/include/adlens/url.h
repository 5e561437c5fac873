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

#ifndef ADLENS_URL_H_
#define ADLENS_URL_H_

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

namespace adlens {

// Offsets of the interesting pieces of an absolute hierarchical URL
// ("scheme://[userinfo@]host[:port]/rest"). Offsets index the string the
// URL was parsed from.
struct UrlParts {
  std::string_view scheme;
  std::string_view host;
  size_t host_begin = 0;
  size_t host_end = 0;
};

// Returns nullopt unless `url` has a scheme, "//" and a non-empty host.
std::optional<UrlParts> SplitUrl(std::string_view url);

inline bool IsAbsoluteUrl(std::string_view url) {
  return SplitUrl(url).has_value();
}

// Lower-cases scheme and host and drops any fragment. Returns nullopt for
// non-absolute input.
std::optional<std::string> NormalizeUrl(std::string_view url);

// Lower-cased host of an absolute URL, or empty.
std::string HostOf(std::string_view url);

// Public-suffix list with the standard longest-match / wildcard / exception
// semantics. Only the ICANN section of the shipped snapshot is loaded.
class PublicSuffixList {
 public:
  // Parses list text in the publicsuffix.org format. Stops at the
  // "===BEGIN PRIVATE DOMAINS===" marker.
  static PublicSuffixList FromText(std::string_view text);

  // The snapshot compiled into the binary.
  static const PublicSuffixList& Default();

  // eTLD+1 for `host`. Hosts that are IP literals, single labels, or public
  // suffixes themselves are returned unchanged (lower-cased).
  std::string RegistrableDomain(std::string_view host) const;

  size_t size() const {
    return rules_.size() + wildcards_.size() + exceptions_.size();
  }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;   // "*.ck" stored as "ck"
  std::unordered_set<std::string> exceptions_;  // "!www.ck" as "www.ck"
};

// Registrable domain of the URL's host using the shipped snapshot. Empty for
// non-absolute URLs.
std::string RegistrableDomainOfUrl(std::string_view url);

}  // namespace adlens

#endif  // ADLENS_URL_H_
