#include "circa/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "circa/errors.hpp"

namespace circa {

MetricId::MetricId(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw Error(ErrorCode::InvalidArgument, "metric name must be non-empty");
}

void WindowConfig::validate() const {
  if (t_delay < 0) throw Error(ErrorCode::InvalidArgument, "t_delay must be >= 0");
  if (t_test <= t_delay) throw Error(ErrorCode::InvalidArgument, "t_test must exceed t_delay");
  if (t_test > t_ref) throw Error(ErrorCode::InvalidArgument, "t_test must not exceed t_ref");
}

Case::Case(std::map<MetricId, TimeSeries> series, Minutes detect_time, WindowConfig windows,
           MetricId sli, std::optional<GroundTruth> truth, std::optional<std::string> fault_type)
    : series_(std::move(series)),
      detect_time_(detect_time),
      windows_(windows),
      sli_(std::move(sli)),
      truth_(std::move(truth)),
      fault_type_(std::move(fault_type)) {
  windows_.validate();
  if (series_.empty()) throw Error(ErrorCode::InvalidArgument, "case has no series");

  const TimeSeries& first = series_.begin()->second;
  start_time_ = first.start_time;
  length_ = first.values.size();
  for (const auto& [id, ts] : series_) {
    if (ts.metric != id) {
      throw Error(ErrorCode::InvalidArgument, "series key " + id.str() + " does not match its metric");
    }
    if (ts.interval != 1) {
      throw Error(ErrorCode::MisalignedSeries, id.str() + ": sampling interval must be 1 minute");
    }
    if (ts.start_time != start_time_ || ts.values.size() != length_) {
      throw Error(ErrorCode::MisalignedSeries, id.str() + " is not aligned with " + first.metric.str());
    }
    for (std::size_t i = 0; i < ts.values.size(); ++i) {
      if (!std::isfinite(ts.values[i])) {
        throw Error(ErrorCode::MissingValue,
                    id.str() + " has a non-finite value at minute " +
                        std::to_string(ts.start_time + static_cast<Minutes>(i)));
      }
    }
  }
  if (!series_.contains(sli_)) throw Error(ErrorCode::MissingSeries, "SLI " + sli_.str() + " has no series");
  if (truth_) {
    if (truth_->root_causes.empty()) throw Error(ErrorCode::InvalidArgument, "ground truth is empty");
    for (const auto& rc : truth_->root_causes) {
      if (!series_.contains(rc)) throw Error(ErrorCode::MissingSeries, "root cause " + rc.str() + " has no series");
    }
  }
}

const TimeSeries& Case::at(const MetricId& metric) const {
  auto it = series_.find(metric);
  if (it == series_.end()) throw Error(ErrorCode::MissingSeries, metric.str());
  return it->second;
}

std::vector<MetricId> Case::metrics() const {
  std::vector<MetricId> out;
  out.reserve(series_.size());
  for (const auto& [id, ts] : series_) out.push_back(id);
  return out;
}

bool operator==(const Case& a, const Case& b) {
  if (a.detect_time_ != b.detect_time_ || !(a.windows_ == b.windows_) || a.sli_ != b.sli_ ||
      a.truth_ != b.truth_ || a.fault_type_ != b.fault_type_ || a.series_.size() != b.series_.size()) {
    return false;
  }
  return std::equal(a.series_.begin(), a.series_.end(), b.series_.begin(), [](const auto& x, const auto& y) {
    return x.first == y.first && x.second.start_time == y.second.start_time &&
           x.second.interval == y.second.interval && x.second.values == y.second.values;
  });
}

CaseSplit split_indices(const Case& c) {
  const WindowConfig& w = c.windows();
  const Minutes td = c.detect_time();
  const Minutes first = c.start_time();
  const Minutes last = first + static_cast<Minutes>(c.length()) - 1;
  const Minutes span_begin = td - w.t_ref;
  const Minutes span_end = td + w.t_delay;
  if (c.length() == 0 || span_begin < first || span_end > last) {
    throw Error(ErrorCode::WindowOutOfRange,
                "series cover [" + std::to_string(first) + ", " + std::to_string(last) + "] but [" +
                    std::to_string(span_begin) + ", " + std::to_string(span_end) + "] is required");
  }
  auto index = [first](Minutes t) { return static_cast<std::size_t>(t - first); };
  CaseSplit split;
  split.reference = {index(td - w.t_ref), index(td - w.t_test) + 1};
  split.test = {index(td + w.t_delay - w.t_test) + 1, index(td + w.t_delay) + 1};
  return split;
}

SplitWindows split_case(const Case& c) {
  const CaseSplit split = split_indices(c);
  SplitWindows out;
  for (const auto& [id, ts] : c.series()) {
    const auto* v = ts.values.data();
    out.reference.emplace(id, std::vector<double>(v + split.reference.begin, v + split.reference.end));
    out.test.emplace(id, std::vector<double>(v + split.test.begin, v + split.test.end));
  }
  return out;
}

Ranking::Ranking(std::vector<RankedMetric> entries) : entries_(std::move(entries)) {
  std::set<MetricId> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!seen.insert(entries_[i].metric).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate metric in ranking: " + entries_[i].metric.str());
    }
    if (i > 0) {
      const auto& prev = entries_[i - 1];
      const auto& cur = entries_[i];
      if (prev.score < cur.score || (prev.score == cur.score && !(prev.metric < cur.metric))) {
        throw Error(ErrorCode::InvalidArgument, "ranking is not in descending score order");
      }
    }
  }
}

std::vector<MetricId> Ranking::top(std::size_t k) const {
  std::vector<MetricId> out;
  const std::size_t n = std::min(k, entries_.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(entries_[i].metric);
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

}  // namespace circa
