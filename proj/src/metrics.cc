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

#include "adlens/metrics.h"

#include <algorithm>
#include <functional>
#include <numeric>
#include <tuple>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "adlens/strings.h"

namespace adlens {

ResourceIndex::ResourceIndex(const std::vector<ResourceRecord>& resources) {
  for (const ResourceRecord& r : resources) by_url_.emplace(r.url, &r);
}

const ResourceRecord* ResourceIndex::Find(std::string_view url) const {
  auto it = by_url_.find(url);
  return it == by_url_.end() ? nullptr : it->second;
}

bool ResourceIndex::IsAd(const std::optional<std::string>& url) const {
  if (!url) return false;
  const ResourceRecord* r = Find(*url);
  return r != nullptr && r->is_ad;
}

Ratio Ratio::Of(double num, double den) {
  if (den == 0) return Ratio{0, true};
  return Ratio{num / den, false};
}

Micros StageMetrics::ad_total() const {
  return std::accumulate(ct_ad.begin(), ct_ad.end(), Micros{0});
}

Micros StageMetrics::grand_total() const {
  return std::accumulate(ct_total.begin(), ct_total.end(), Micros{0});
}

Micros StageMetrics::unattributed_total() const {
  return std::accumulate(ct_unattributed.begin(), ct_unattributed.end(),
                         Micros{0});
}

Ratio StageMetrics::r1(Stage s) const {
  return Ratio::Of(ct_ad[Index(s)], ct_total[Index(s)]);
}

Ratio StageMetrics::r2(Stage s) const {
  return Ratio::Of(ct_ad[Index(s)], ad_total());
}

Ratio StageMetrics::r3(Stage s) const {
  return Ratio::Of(ct_total[Index(s)], grand_total());
}

StageMetrics ComputeStageMetrics(
    const std::vector<AttributedActivity>& attributed,
    const ResourceIndex& resources) {
  StageMetrics m;
  for (const AttributedActivity& rec : attributed) {
    int s = Index(rec.activity.stage);
    Micros self = rec.activity.self_time;
    m.ct_total[s] += self;
    if (!rec.resource) {
      m.ct_unattributed[s] += self;
    } else if (resources.IsAd(rec.resource)) {
      m.ct_ad[s] += self;
    }
  }
  return m;
}

absl::StatusOr<double> ComputationCostFraction(
    const std::vector<AttributedActivity>& attributed,
    const ResourceIndex& resources) {
  StageMetrics m = ComputeStageMetrics(attributed, resources);
  if (m.grand_total() <= 0) {
    return absl::FailedPreconditionError("no computation time to divide by");
  }
  return static_cast<double>(m.ad_total()) /
         static_cast<double>(m.grand_total());
}

std::string_view NetworkTimeModeName(NetworkTimeMode mode) {
  return mode == NetworkTimeMode::kSum ? "sum" : "wallclock";
}

std::optional<NetworkTimeMode> NetworkTimeModeFromName(std::string_view name) {
  if (name == "sum") return NetworkTimeMode::kSum;
  if (name == "wallclock") return NetworkTimeMode::kWallclock;
  return std::nullopt;
}

Micros NetworkTime(const std::vector<TimeRange>& intervals,
                   NetworkTimeMode mode) {
  if (mode == NetworkTimeMode::kSum) {
    Micros total = 0;
    for (const TimeRange& r : intervals) total += r.end - r.begin;
    return total;
  }
  std::vector<TimeRange> sorted = intervals;
  std::sort(sorted.begin(), sorted.end(),
            [](const TimeRange& a, const TimeRange& b) {
              return std::tie(a.begin, a.end) < std::tie(b.begin, b.end);
            });
  Micros total = 0;
  std::optional<TimeRange> cur;
  for (const TimeRange& r : sorted) {
    if (cur && r.begin <= cur->end) {
      cur->end = std::max(cur->end, r.end);
      continue;
    }
    if (cur) total += cur->end - cur->begin;
    cur = r;
  }
  if (cur) total += cur->end - cur->begin;
  return total;
}

namespace {

void AppendIntervals(const ResourceRecord& r, std::vector<TimeRange>* out) {
  out->insert(out->end(), r.intervals.begin(), r.intervals.end());
}

}  // namespace

absl::StatusOr<double> NetworkCostFraction(
    const std::vector<ResourceRecord>& resources, NetworkTimeMode mode) {
  std::vector<TimeRange> ad, all;
  for (const ResourceRecord& r : resources) {
    if (!r.from_network) continue;
    AppendIntervals(r, &all);
    if (r.is_ad) AppendIntervals(r, &ad);
  }
  Micros total = NetworkTime(all, mode);
  if (total <= 0) {
    return absl::FailedPreconditionError("no network time to divide by");
  }
  return static_cast<double>(NetworkTime(ad, mode)) /
         static_cast<double>(total);
}

int64_t ContentTypeMetrics::nr_ad_all() const {
  int64_t n = 0;
  for (const ContentTypeRow& r : rows) n += r.nr_ad;
  return n;
}

int64_t ContentTypeMetrics::nr_total_all() const {
  int64_t n = 0;
  for (const ContentTypeRow& r : rows) n += r.nr_total;
  return n;
}

Ratio ContentTypeMetrics::nr_ad_within_type(ContentType c) const {
  return Ratio::Of(row(c).nr_ad, row(c).nr_total);
}
Ratio ContentTypeMetrics::nr_type_of_ads(ContentType c) const {
  return Ratio::Of(row(c).nr_ad, nr_ad_all());
}
Ratio ContentTypeMetrics::nr_type_of_all(ContentType c) const {
  return Ratio::Of(row(c).nr_total, nr_total_all());
}
Ratio ContentTypeMetrics::nt_ad_within_type(ContentType c) const {
  return Ratio::Of(row(c).nt_ad, row(c).nt_total);
}
Ratio ContentTypeMetrics::nt_type_of_ads(ContentType c) const {
  return Ratio::Of(row(c).nt_ad, nt_ad_all);
}
Ratio ContentTypeMetrics::nt_type_of_all(ContentType c) const {
  return Ratio::Of(row(c).nt_total, nt_total_all);
}

void ContentTypeMetrics::Merge(const ContentTypeMetrics& other) {
  for (int i = 0; i < kNumContentTypes; ++i) {
    rows[i].nr_ad += other.rows[i].nr_ad;
    rows[i].nr_total += other.rows[i].nr_total;
    rows[i].nt_ad += other.rows[i].nt_ad;
    rows[i].nt_total += other.rows[i].nt_total;
    rows[i].present = rows[i].present || other.rows[i].present;
  }
  nt_ad_all += other.nt_ad_all;
  nt_total_all += other.nt_total_all;
}

ContentTypeMetrics ComputeContentTypeTable(
    const std::vector<ResourceRecord>& resources, NetworkTimeMode mode) {
  ContentTypeMetrics m;
  std::array<std::vector<TimeRange>, kNumContentTypes> ad, all;
  std::vector<TimeRange> ad_all, total_all;
  for (const ResourceRecord& r : resources) {
    if (!r.from_network) continue;
    int c = Index(r.content_type);
    ContentTypeRow& row = m.rows[c];
    row.present = true;
    ++row.nr_total;
    AppendIntervals(r, &all[c]);
    AppendIntervals(r, &total_all);
    if (r.is_ad) {
      ++row.nr_ad;
      AppendIntervals(r, &ad[c]);
      AppendIntervals(r, &ad_all);
    }
  }
  for (int c = 0; c < kNumContentTypes; ++c) {
    m.rows[c].nt_ad = NetworkTime(ad[c], mode);
    m.rows[c].nt_total = NetworkTime(all[c], mode);
  }
  m.nt_ad_all = NetworkTime(ad_all, mode);
  m.nt_total_all = NetworkTime(total_all, mode);
  return m;
}

std::map<std::string, DomainTimes> AdCostByDomain(
    const std::vector<AttributedActivity>& attributed,
    const std::vector<ResourceRecord>& resources, NetworkTimeMode mode) {
  ResourceIndex index(resources);
  std::map<std::string, DomainTimes> out;
  for (const AttributedActivity& rec : attributed) {
    if (!rec.resource) continue;
    const ResourceRecord* r = index.Find(*rec.resource);
    if (r == nullptr || !r->is_ad) continue;
    out[r->domain].computation += rec.activity.self_time;
  }
  std::map<std::string, std::vector<TimeRange>> intervals;
  for (const ResourceRecord& r : resources) {
    if (r.is_ad && r.from_network) AppendIntervals(r, &intervals[r.domain]);
  }
  for (const auto& [domain, ranges] : intervals) {
    out[domain].network = NetworkTime(ranges, mode);
  }
  return out;
}

void DomainCostTable::Add(std::string_view page_url,
                          const std::map<std::string, DomainTimes>& costs) {
  for (const auto& [domain, times] : costs) {
    Acc& acc = by_domain_[domain];
    acc.times.computation += times.computation;
    acc.times.network += times.network;
    acc.pages[std::string(page_url)] = true;
  }
}

void DomainCostTable::Merge(const DomainCostTable& other) {
  for (const auto& [domain, src] : other.by_domain_) {
    Acc& acc = by_domain_[domain];
    acc.times.computation += src.times.computation;
    acc.times.network += src.times.network;
    acc.pages.insert(src.pages.begin(), src.pages.end());
  }
}

std::vector<DomainCost> DomainCostTable::Finish() const {
  Micros comp_total = 0, net_total = 0;
  for (const auto& [domain, acc] : by_domain_) {
    comp_total += acc.times.computation;
    net_total += acc.times.network;
  }
  std::vector<DomainCost> out;
  for (const auto& [domain, acc] : by_domain_) {
    DomainCost c;
    c.domain = domain;
    c.computation_time = acc.times.computation;
    c.network_time = acc.times.network;
    c.computation_share = Ratio::Of(c.computation_time, comp_total).value;
    c.network_share = Ratio::Of(c.network_time, net_total).value;
    c.referrer_count = static_cast<int64_t>(acc.pages.size());
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const DomainCost& a, const DomainCost& b) {
                     if (a.computation_time != b.computation_time) {
                       return a.computation_time > b.computation_time;
                     }
                     if (a.network_time != b.network_time) {
                       return a.network_time > b.network_time;
                     }
                     return a.domain < b.domain;
                   });
  return out;
}

double VtScore::score() const {
  return total_flags <= 0 ? 0.0
                          : static_cast<double>(safe_flags) /
                                static_cast<double>(total_flags);
}

namespace {

// Splits CSV text into rows of trimmed fields. A first row whose numeric
// columns do not parse is taken as a header and skipped.
absl::StatusOr<std::vector<std::vector<std::string>>> CsvRows(
    std::string_view text, size_t columns, std::string_view what) {
  std::vector<std::vector<std::string>> rows;
  int line_no = 0;
  for (std::string_view line : StrSplit(text, '\n')) {
    ++line_no;
    line = StripAsciiWhitespace(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    for (std::string_view f : StrSplit(line, ',')) {
      fields.emplace_back(StripAsciiWhitespace(f));
    }
    if (fields.size() != columns) {
      return absl::InvalidArgumentError(absl::StrCat(
          ToAbsl(what), " line ", line_no, ": expected ", columns, " fields"));
    }
    fields[0] = AsciiStrToLower(fields[0]);
    rows.push_back(std::move(fields));
  }
  if (!rows.empty()) {
    double unused;
    if (!SimpleAtod(rows[0][1], &unused)) rows.erase(rows.begin());
  }
  return rows;
}

absl::Status BadField(std::string_view what, std::string_view domain) {
  return absl::InvalidArgumentError(
      absl::StrCat(ToAbsl(what), ": bad value for ", ToAbsl(domain)));
}

}  // namespace

absl::StatusOr<std::map<std::string, double>> ParseWotCsv(
    std::string_view text) {
  auto rows = CsvRows(text, 2, "wot");
  if (!rows.ok()) return rows.status();
  std::map<std::string, double> out;
  for (const auto& f : *rows) {
    double raw;
    if (!SimpleAtod(f[1], &raw) || raw < 0 || raw > 100) {
      return BadField("wot", f[0]);
    }
    out[f[0]] = raw / 100.0;
  }
  return out;
}

absl::StatusOr<std::map<std::string, VtScore>> ParseVtCsv(
    std::string_view text) {
  auto rows = CsvRows(text, 3, "vt");
  if (!rows.ok()) return rows.status();
  std::map<std::string, VtScore> out;
  for (const auto& f : *rows) {
    VtScore s;
    if (!SimpleAtoi(f[1], &s.safe_flags) || !SimpleAtoi(f[2], &s.total_flags) ||
        s.total_flags <= 0 || s.safe_flags < 0 ||
        s.safe_flags > s.total_flags) {
      return BadField("vt", f[0]);
    }
    out[f[0]] = s;
  }
  return out;
}

absl::StatusOr<std::map<std::string, int64_t>> ParseRanksCsv(
    std::string_view text) {
  auto rows = CsvRows(text, 2, "ranks");
  if (!rows.ok()) return rows.status();
  std::map<std::string, int64_t> out;
  for (const auto& f : *rows) {
    int64_t rank;
    if (!SimpleAtoi(f[1], &rank) || rank < 1) {
      return BadField("ranks", f[0]);
    }
    out[f[0]] = rank;
  }
  return out;
}

std::string_view WotRating(double score, const WotBands& bands) {
  if (score >= bands.excellent) return "excellent";
  if (score >= bands.good) return "good";
  if (score >= bands.unsatisfactory) return "unsatisfactory";
  if (score >= bands.poor) return "poor";
  return "very poor";
}

namespace {

double CostOf(const DomainCost& c, CostKind kind) {
  return kind == CostKind::kComputation
             ? static_cast<double>(c.computation_time)
             : static_cast<double>(c.network_time);
}

struct Keyed {
  double key;
  double cost;
  std::string band;
};

// Orders by key (descending when `descending`), merges equal keys into one
// step and normalizes by the matched total. Bands are reported in the order
// they are first reached.
CdfSeries Cumulate(std::vector<Keyed> items, bool descending,
                   std::vector<std::string> unmatched, double unmatched_cost,
                   double all_cost) {
  CdfSeries series;
  std::sort(unmatched.begin(), unmatched.end());
  series.unmatched = std::move(unmatched);
  series.unmatched_share = all_cost > 0 ? unmatched_cost / all_cost : 0.0;

  std::stable_sort(items.begin(), items.end(),
                   [descending](const Keyed& a, const Keyed& b) {
                     return descending ? a.key > b.key : a.key < b.key;
                   });
  double total = 0;
  for (const Keyed& k : items) total += k.cost;
  if (total <= 0) return series;

  double running = 0;
  for (size_t i = 0; i < items.size();) {
    size_t j = i;
    while (j < items.size() && items[j].key == items[i].key) {
      running += items[j].cost;
      ++j;
    }
    double y = j == items.size() ? 1.0 : running / total;
    series.points.push_back({items[i].key, y});
    i = j;
  }

  running = 0;
  for (size_t i = 0; i < items.size(); ++i) {
    running += items[i].cost;
    bool last_of_band =
        i + 1 == items.size() || items[i + 1].band != items[i].band;
    if (last_of_band && !items[i].band.empty()) {
      series.bands.push_back(
          {items[i].band, i + 1 == items.size() ? 1.0 : running / total});
    }
  }
  return series;
}

template <typename Score, typename KeyFn, typename BandFn>
CdfSeries ScoredCdf(const std::vector<DomainCost>& costs,
                    const std::map<std::string, Score>& scores, CostKind kind,
                    bool descending, KeyFn key_fn, BandFn band_fn) {
  std::vector<Keyed> items;
  std::vector<std::string> unmatched;
  double unmatched_cost = 0, all_cost = 0;
  for (const DomainCost& c : costs) {
    double cost = CostOf(c, kind);
    all_cost += cost;
    auto it = scores.find(AsciiStrToLower(c.domain));
    if (it == scores.end()) {
      unmatched.push_back(c.domain);
      unmatched_cost += cost;
      continue;
    }
    items.push_back({key_fn(it->second), cost, band_fn(it->second)});
  }
  return Cumulate(std::move(items), descending, std::move(unmatched),
                  unmatched_cost, all_cost);
}

}  // namespace

CdfSeries WotCdf(const std::vector<DomainCost>& costs,
                 const std::map<std::string, double>& wot, CostKind kind,
                 const WotBands& bands) {
  return ScoredCdf(
      costs, wot, kind, /*descending=*/true, [](double s) { return s; },
      [&bands](double s) { return std::string(WotRating(s, bands)); });
}

CdfSeries VtCdf(const std::vector<DomainCost>& costs,
                const std::map<std::string, VtScore>& vt, CostKind kind) {
  return ScoredCdf(
      costs, vt, kind, /*descending=*/true,
      [](const VtScore& s) { return s.score(); },
      [](const VtScore& s) {
        int64_t lo = s.red_flags() / 3 * 3;
        return absl::StrCat(lo, "-", lo + 2, " flags");
      });
}

CdfSeries ReferrerCdf(const std::vector<DomainCost>& costs, CostKind kind) {
  std::vector<Keyed> items;
  double all_cost = 0;
  for (const DomainCost& c : costs) {
    items.push_back(
        {static_cast<double>(c.referrer_count), CostOf(c, kind), ""});
    all_cost += CostOf(c, kind);
  }
  return Cumulate(std::move(items), /*descending=*/true, {}, 0, all_cost);
}

CdfSeries RankCdf(const std::vector<DomainCost>& costs,
                  const std::map<std::string, int64_t>& ranks, CostKind kind) {
  return ScoredCdf(
      costs, ranks, kind, /*descending=*/false,
      [](int64_t r) { return static_cast<double>(r); },
      [](int64_t) { return std::string(); });
}

std::vector<CdfPoint> Ecdf(std::vector<double> values) {
  std::vector<CdfPoint> out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.push_back({values[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

double Median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

}  // namespace adlens
