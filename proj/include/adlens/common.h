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

#ifndef ADLENS_COMMON_H_
#define ADLENS_COMMON_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace adlens {

// All times in the pipeline are integer microseconds on the trace clock.
using Micros = int64_t;

// Machine-readable warning counters keyed by a dotted code, e.g.
// "trace.unmatched_end". Ordered so that serialization is stable.
class Warnings {
 public:
  void Add(std::string_view code, int64_t n = 1);
  void Merge(const Warnings& other);
  int64_t Count(std::string_view code) const;
  bool empty() const { return counts_.empty(); }
  const std::map<std::string, int64_t, std::less<>>& counts() const {
    return counts_;
  }

 private:
  std::map<std::string, int64_t, std::less<>> counts_;
};

// Network content types, in the row order of the per-content-type table.
enum class ContentType {
  kScript,
  kHtml,
  kImage,
  kFont,
  kCss,
  kXml,
  kXhr,
  kMedia,
  kUnknown,
};
inline constexpr int kNumContentTypes = 9;
inline constexpr std::array<ContentType, kNumContentTypes> kAllContentTypes = {
    ContentType::kScript, ContentType::kHtml,  ContentType::kImage,
    ContentType::kFont,   ContentType::kCss,   ContentType::kXml,
    ContentType::kXhr,    ContentType::kMedia, ContentType::kUnknown};

std::string_view ContentTypeName(ContentType type);
std::optional<ContentType> ContentTypeFromName(std::string_view name);

// The six page-loading computation stages.
enum class Stage {
  kHtmlParsing,
  kStyling,
  kScripting,
  kLayout,
  kComposite,
  kPaint,
};
inline constexpr int kNumStages = 6;
inline constexpr std::array<Stage, kNumStages> kAllStages = {
    Stage::kHtmlParsing, Stage::kStyling,   Stage::kScripting,
    Stage::kLayout,      Stage::kComposite, Stage::kPaint};

std::string_view StageName(Stage stage);
std::optional<Stage> StageFromName(std::string_view name);

inline int Index(Stage s) { return static_cast<int>(s); }
inline int Index(ContentType c) { return static_cast<int>(c); }

}  // namespace adlens

#endif  // ADLENS_COMMON_H_
