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

// Shared helpers for the test binaries: fixture lookup and generators for
// random traces and bundles.

#ifndef ADLENS_TESTS_SUPPORT_TEST_SUPPORT_H_
#define ADLENS_TESTS_SUPPORT_TEST_SUPPORT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "adlens/activity_extractor.h"
#include "adlens/filter_engine.h"
#include "adlens/report.h"
#include "adlens/resource_mapper.h"
#include "adlens/trace_ingest.h"
#include "json.hpp"

namespace adlens::testing {

std::filesystem::path FixturePath(std::string_view rel);
std::filesystem::path DataPath(std::string_view rel);
std::string ReadFixture(std::string_view rel);
nlohmann::json ReadFixtureJson(std::string_view rel);
RuleSet FixtureRules(std::string_view rel);

// A fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Properly nested intervals, possibly sharing endpoints, never identical.
struct Interval {
  Micros start = 0;
  Micros end = 0;
};
std::vector<Interval> RandomNestedIntervals(std::mt19937_64& rng, int n);

// Parent of each interval under minimal strict enclosure, by brute force.
std::vector<std::optional<size_t>> EnclosureOracle(
    const std::vector<Interval>& intervals);

// Activities over `intervals`, all on one thread, ids equal to indices.
std::vector<Activity> ActivitiesFor(const std::vector<Interval>& intervals,
                                    Stage stage = Stage::kScripting);

struct RandomBundleOptions {
  int max_activities = 60;
  int threads = 3;
  double ad_share = 0.4;
  double marker_rate = 0.15;
};

// A self-consistent synthetic bundle: random nested activities across a few
// threads, invalidation markers, a network log and dependency edges. Ads are
// served from *.adnet.test and match SyntheticRules().
Bundle RandomBundle(std::mt19937_64& rng, int index,
                    const RandomBundleOptions& options = {});
RuleSet SyntheticRules();

// Writes the four bundle files in the on-disk format.
void WriteBundle(const Bundle& bundle, const std::filesystem::path& dir);

// Random Adblock-syntax list and request context over a small shared
// vocabulary, so that index tokens collide often.
std::string RandomRuleList(std::mt19937_64& rng, int max_rules = 40);
MatchContext RandomMatchContext(std::mt19937_64& rng);

// One case of the committed reference-matcher corpus.
struct FilterCorpusCase {
  std::string line;  // Raw JSON, for failure messages.
  std::string rules;
  MatchContext context;
  bool expected = false;
};
std::vector<FilterCorpusCase> LoadFilterCorpus();

// A trace where 2-5 scripts fire the same invalidation before one style or
// layout runs. Returns the first firer and the attribution the pipeline gave
// the style/layout work.
struct InitiatorTrial {
  std::string first_firer;
  std::optional<std::string> attributed;
  AttributionPath path = AttributionPath::kUnattributed;
};
InitiatorTrial RunFirstInitiatorTrial(std::mt19937_64& rng);

// Sum of self time over all attributed activities.
Micros TotalSelfTime(const std::vector<AttributedActivity>& attributed);

}  // namespace adlens::testing

#endif  // ADLENS_TESTS_SUPPORT_TEST_SUPPORT_H_
