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

#include "adlens/common.h"

namespace adlens {

void Warnings::Add(std::string_view code, int64_t n) {
  auto it = counts_.find(code);
  if (it == counts_.end()) {
    counts_.emplace(std::string(code), n);
  } else {
    it->second += n;
  }
}

void Warnings::Merge(const Warnings& other) {
  for (const auto& [code, n] : other.counts_) Add(code, n);
}

int64_t Warnings::Count(std::string_view code) const {
  auto it = counts_.find(code);
  return it == counts_.end() ? 0 : it->second;
}

std::string_view ContentTypeName(ContentType type) {
  switch (type) {
    case ContentType::kScript:
      return "Script";
    case ContentType::kHtml:
      return "HTML";
    case ContentType::kImage:
      return "Image";
    case ContentType::kFont:
      return "Font";
    case ContentType::kCss:
      return "CSS";
    case ContentType::kXml:
      return "XML";
    case ContentType::kXhr:
      return "XHR";
    case ContentType::kMedia:
      return "Media";
    case ContentType::kUnknown:
      return "Unknown";
  }
  return "Unknown";
}

std::optional<ContentType> ContentTypeFromName(std::string_view name) {
  for (ContentType c : kAllContentTypes) {
    if (ContentTypeName(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kHtmlParsing:
      return "HtmlParsing";
    case Stage::kStyling:
      return "Styling";
    case Stage::kScripting:
      return "Scripting";
    case Stage::kLayout:
      return "Layout";
    case Stage::kComposite:
      return "Composite";
    case Stage::kPaint:
      return "Paint";
  }
  return "Scripting";
}

std::optional<Stage> StageFromName(std::string_view name) {
  for (Stage s : kAllStages) {
    if (StageName(s) == name) return s;
  }
  return std::nullopt;
}

}  // namespace adlens
