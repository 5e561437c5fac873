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

// Ad cost metrics over attributed activities and classified resources.
//
// Ratios with a zero denominator are reported as 0 with the matching
// `undefined` flag set.

#ifndef ADLENS_METRICS_H_
#define ADLENS_METRICS_H_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "adlens/common.h"
#include "adlens/filter_engine.h"
#include "adlens/resource_mapper.h"

namespace adlens {

// URL -> resource lookup for attributed activities.
class ResourceIndex {
 public:
  explicit ResourceIndex(const std::vector<ResourceRecord>& resources);

  const ResourceRecord* Find(std::string_view url) const;
  bool IsAd(const std::optional<std::string>& url) const;

 private:
  std::unordered_map<std::string_view, const ResourceRecord*> by_url_;
};

struct Ratio {
  double value = 0;
  bool undefined = false;

  static Ratio Of(double num, double den);
};

// Computation split by stage, in microseconds of self time.
struct StageMetrics {
  std::array<Micros, kNumStages> ct_ad{};
  std::array<Micros, kNumStages> ct_total{};
  std::array<Micros, kNumStages> ct_unattributed{};

  Micros ad_total() const;
  Micros grand_total() const;
  Micros unattributed_total() const;

  Ratio r1(Stage s) const;  // ad share within the stage
  Ratio r2(Stage s) const;  // stage share of ad time
  Ratio r3(Stage s) const;  // stage share of all time
};

StageMetrics ComputeStageMetrics(
    const std::vector<AttributedActivity>& attributed,
    const ResourceIndex& resources);

// Ad self time over all self time. Unattributed time counts in the
// denominator only. Fails when there is no computation at all.
absl::StatusOr<double> ComputationCostFraction(
    const std::vector<AttributedActivity>& attributed,
    const ResourceIndex& resources);

enum class NetworkTimeMode {
  kSum,        // Per-request durations summed, overlaps counted twice.
  kWallclock,  // Length of the union of request intervals.
};

std::string_view NetworkTimeModeName(NetworkTimeMode mode);
std::optional<NetworkTimeMode> NetworkTimeModeFromName(std::string_view name);

// Network time of a set of intervals under `mode`.
Micros NetworkTime(const std::vector<TimeRange>& intervals,
                   NetworkTimeMode mode);

// Only resources seen on the network contribute.
absl::StatusOr<double> NetworkCostFraction(
    const std::vector<ResourceRecord>& resources,
    NetworkTimeMode mode = NetworkTimeMode::kSum);

struct ContentTypeRow {
  int64_t nr_ad = 0;
  int64_t nr_total = 0;
  Micros nt_ad = 0;
  Micros nt_total = 0;
  bool present = false;
};

struct ContentTypeMetrics {
  std::array<ContentTypeRow, kNumContentTypes> rows{};
  // Totals across types; in wallclock mode these are unions over all
  // requests, not sums of the rows.
  Micros nt_ad_all = 0;
  Micros nt_total_all = 0;

  int64_t nr_ad_all() const;
  int64_t nr_total_all() const;

  const ContentTypeRow& row(ContentType c) const { return rows[Index(c)]; }
  Ratio nr_ad_within_type(ContentType c) const;  // nr^c_ad / nr^c_*
  Ratio nr_type_of_ads(ContentType c) const;     // nr^c_ad / nr^*_ad
  Ratio nr_type_of_all(ContentType c) const;     // nr^c_* / nr^*_*
  Ratio nt_ad_within_type(ContentType c) const;  // nt^c_ad / nt^c_*
  Ratio nt_type_of_ads(ContentType c) const;     // nt^c_ad / nt^*_ad
  Ratio nt_type_of_all(ContentType c) const;     // nt^c_* / nt^*_*

  void Merge(const ContentTypeMetrics& other);
};

ContentTypeMetrics ComputeContentTypeTable(
    const std::vector<ResourceRecord>& resources,
    NetworkTimeMode mode = NetworkTimeMode::kSum);

// Raw ad cost of one page grouped by the registrable domain of the
// attributed resource.
struct DomainTimes {
  Micros computation = 0;
  Micros network = 0;
};

std::map<std::string, DomainTimes> AdCostByDomain(
    const std::vector<AttributedActivity>& attributed,
    const std::vector<ResourceRecord>& resources,
    NetworkTimeMode mode = NetworkTimeMode::kSum);

struct DomainCost {
  std::string domain;
  Micros computation_time = 0;
  Micros network_time = 0;
  double computation_share = 0;
  double network_share = 0;
  int64_t referrer_count = 0;  // Distinct pages served by the domain.
};

// Sums per-page domain costs. Add() calls commute.
class DomainCostTable {
 public:
  void Add(std::string_view page_url,
           const std::map<std::string, DomainTimes>& costs);
  void Merge(const DomainCostTable& other);

  // Sorted by computation share, then network share (both descending), then
  // domain.
  std::vector<DomainCost> Finish() const;

 private:
  struct Acc {
    DomainTimes times;
    std::map<std::string, bool> pages;
  };
  std::map<std::string, Acc> by_domain_;
};

// Score files. Domains are registrable domains, compared lower-cased.
struct VtScore {
  int64_t safe_flags = 0;
  int64_t total_flags = 0;

  double score() const;
  int64_t red_flags() const { return total_flags - safe_flags; }
};

// Each table is absent when its file was not supplied.
struct ScoreTables {
  std::optional<std::map<std::string, double>> wot;  // Normalized to [0,1].
  std::optional<std::map<std::string, VtScore>> vt;
  std::optional<std::map<std::string, int64_t>> ranks;
};

absl::StatusOr<std::map<std::string, double>> ParseWotCsv(
    std::string_view text);
absl::StatusOr<std::map<std::string, VtScore>> ParseVtCsv(
    std::string_view text);
absl::StatusOr<std::map<std::string, int64_t>> ParseRanksCsv(
    std::string_view text);

// Lower bounds of the excellent, good, unsatisfactory and poor ratings.
struct WotBands {
  double excellent = 0.8;
  double good = 0.6;
  double unsatisfactory = 0.4;
  double poor = 0.2;
};

std::string_view WotRating(double score, const WotBands& bands = {});

struct CdfPoint {
  double x = 0;
  double y = 0;

  bool operator==(const CdfPoint&) const = default;
};

struct CdfBand {
  std::string label;
  double cumulative = 0;  // Cost share of this band and every band above it.
};

struct CdfSeries {
  std::vector<CdfPoint> points;
  std::vector<CdfBand> bands;
  std::vector<std::string> unmatched;  // Sorted.
  double unmatched_share = 0;          // Of the total cost of all domains.
};

enum class CostKind { kComputation, kNetwork };

// Cumulative cost share over domains ordered by descending WOT score.
CdfSeries WotCdf(const std::vector<DomainCost>& costs,
                 const std::map<std::string, double>& wot, CostKind kind,
                 const WotBands& bands = {});

// Same over descending VirusTotal score; bands group red flags by 3.
CdfSeries VtCdf(const std::vector<DomainCost>& costs,
                const std::map<std::string, VtScore>& vt, CostKind kind);

// Cumulative cost share over domains by descending referrer count.
CdfSeries ReferrerCdf(const std::vector<DomainCost>& costs, CostKind kind);

// Cumulative cost share over domains by ascending rank.
CdfSeries RankCdf(const std::vector<DomainCost>& costs,
                  const std::map<std::string, int64_t>& ranks, CostKind kind);

// Empirical CDF: one point per distinct value, y = fraction <= x.
std::vector<CdfPoint> Ecdf(std::vector<double> values);

// Mean of the two middle values for an even count. Empty input gives 0.
double Median(std::vector<double> values);

}  // namespace adlens

#endif  // ADLENS_METRICS_H_
