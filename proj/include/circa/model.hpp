#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace circa {

// Metric identifier. Ordered lexicographically; that order is the tie-break
// used everywhere a deterministic ordering over metrics is needed.
class MetricId {
 public:
  MetricId(std::string name);  // NOLINT(google-explicit-constructor)
  MetricId(const char* name) : MetricId(std::string(name)) {}  // NOLINT

  const std::string& str() const noexcept { return name_; }

  friend auto operator<=>(const MetricId&, const MetricId&) = default;
  friend bool operator==(const MetricId&, const MetricId&) = default;

 private:
  std::string name_;
};

using Minutes = std::int64_t;

// One metric sampled once per minute starting at `start_time`.
struct TimeSeries {
  MetricId metric;
  Minutes start_time = 0;
  Minutes interval = 1;
  std::vector<double> values;

  Minutes end_time() const noexcept {  // inclusive timestamp of the last sample
    return start_time + static_cast<Minutes>(values.size()) * interval - interval;
  }
};

struct WindowConfig {
  Minutes t_ref = 120;
  Minutes t_delay = 5;
  Minutes t_test = 10;

  // Throws InvalidArgument unless t_delay >= 0, t_test > t_delay, t_test <= t_ref.
  void validate() const;

  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

struct GroundTruth {
  std::set<MetricId> root_causes;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

// A windowed slice of aligned metrics around one detected fault.
//
// All series share start time, interval and length, and every value is
// finite. Series coverage of the analysis span is not required here;
// split_case reports WindowOutOfRange when it is missing.
class Case {
 public:
  Case(std::map<MetricId, TimeSeries> series, Minutes detect_time, WindowConfig windows,
       MetricId sli, std::optional<GroundTruth> truth = std::nullopt,
       std::optional<std::string> fault_type = std::nullopt);

  const std::map<MetricId, TimeSeries>& series() const noexcept { return series_; }
  const TimeSeries& at(const MetricId& metric) const;
  bool contains(const MetricId& metric) const { return series_.contains(metric); }
  std::vector<MetricId> metrics() const;

  Minutes detect_time() const noexcept { return detect_time_; }
  const WindowConfig& windows() const noexcept { return windows_; }
  const MetricId& sli() const noexcept { return sli_; }
  const std::optional<GroundTruth>& truth() const noexcept { return truth_; }
  const std::optional<std::string>& fault_type() const noexcept { return fault_type_; }

  Minutes start_time() const noexcept { return start_time_; }
  std::size_t length() const noexcept { return length_; }

  friend bool operator==(const Case&, const Case&);

 private:
  std::map<MetricId, TimeSeries> series_;
  Minutes detect_time_;
  WindowConfig windows_;
  MetricId sli_;
  std::optional<GroundTruth> truth_;
  std::optional<std::string> fault_type_;
  Minutes start_time_ = 0;
  std::size_t length_ = 0;
};

// Half-open range of sample indices [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end == begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// Sample positions of the fault-free reference range [t_d - t_ref, t_d - t_test]
// and the test range (t_d + t_delay - t_test, t_d + t_delay]. The samples
// in between belong to neither.
struct CaseSplit {
  IndexRange reference;
  IndexRange test;
};

CaseSplit split_indices(const Case& c);

struct SplitWindows {
  std::map<MetricId, std::vector<double>> reference;
  std::map<MetricId, std::vector<double>> test;
};

SplitWindows split_case(const Case& c);

struct RankedMetric {
  MetricId metric;
  double score;

  friend bool operator==(const RankedMetric&, const RankedMetric&) = default;
};

// Metrics in descending score order, ties broken by ascending MetricId.
class Ranking {
 public:
  Ranking() = default;
  // Throws InvalidArgument if entries are out of order or contain duplicates.
  explicit Ranking(std::vector<RankedMetric> entries);

  const std::vector<RankedMetric>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const RankedMetric& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  // First min(k, size()) metrics.
  std::vector<MetricId> top(std::size_t k) const;

  friend bool operator==(const Ranking&, const Ranking&) = default;

 private:
  std::vector<RankedMetric> entries_;
};

// Population standard deviation; 0 for fewer than two samples.
double population_std(std::span<const double> values);
double mean(std::span<const double> values);

}  // namespace circa

template <>
struct std::hash<circa::MetricId> {
  std::size_t operator()(const circa::MetricId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
