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

// std::string_view front ends for the Abseil string helpers. Older Abseil
// builds carry their own string_view type that does not convert to or from
// the standard one.

#ifndef ADLENS_STRINGS_H_
#define ADLENS_STRINGS_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

namespace adlens {

inline absl::string_view ToAbsl(std::string_view s) {
  return absl::string_view(s.data(), s.size());
}

inline std::string_view FromAbsl(absl::string_view s) {
  return std::string_view(s.data(), s.size());
}

inline std::vector<std::string_view> StrSplit(std::string_view s, char sep,
                                              bool skip_empty = false) {
  std::vector<std::string_view> out;
  if (skip_empty) {
    for (absl::string_view p :
         absl::StrSplit(ToAbsl(s), sep, absl::SkipEmpty())) {
      out.push_back(FromAbsl(p));
    }
  } else {
    for (absl::string_view p : absl::StrSplit(ToAbsl(s), sep)) {
      out.push_back(FromAbsl(p));
    }
  }
  return out;
}

inline std::string_view StripAsciiWhitespace(std::string_view s) {
  return FromAbsl(absl::StripAsciiWhitespace(ToAbsl(s)));
}

inline std::string AsciiStrToLower(std::string_view s) {
  return absl::AsciiStrToLower(ToAbsl(s));
}

inline bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.starts_with(prefix);
}

inline bool StrContains(std::string_view s, std::string_view needle) {
  return s.find(needle) != std::string_view::npos;
}

inline bool ConsumePrefix(std::string_view* s, std::string_view prefix) {
  if (!s->starts_with(prefix)) return false;
  s->remove_prefix(prefix.size());
  return true;
}

inline bool ConsumeSuffix(std::string_view* s, std::string_view suffix) {
  if (!s->ends_with(suffix)) return false;
  s->remove_suffix(suffix.size());
  return true;
}

inline std::string_view StripSuffix(std::string_view s,
                                    std::string_view suffix) {
  ConsumeSuffix(&s, suffix);
  return s;
}

template <typename Int>
bool SimpleAtoi(std::string_view s, Int* out) {
  return absl::SimpleAtoi(ToAbsl(s), out);
}

inline bool SimpleAtod(std::string_view s, double* out) {
  return absl::SimpleAtod(ToAbsl(s), out);
}

}  // namespace adlens

#endif  // ADLENS_STRINGS_H_
