#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "circa/graph.hpp"
#include "circa/model.hpp"

namespace circa {

// The four golden signals; the enumerator order is also the tie-break order
// inside one service when ordering meta metrics.
enum class MetaMetricDim { Traffic, Saturation, Latency, Errors };

std::string_view to_string(MetaMetricDim dim);
std::optional<MetaMetricDim> parse_dim(std::string_view text);  // lower-case names

struct MetaMetric {
  std::string service;
  MetaMetricDim dim;

  friend auto operator<=>(const MetaMetric&, const MetaMetric&) = default;
  friend bool operator==(const MetaMetric&, const MetaMetric&) = default;
};

std::string to_string(const MetaMetric& m);

struct ServiceNode {
  std::string service;
  std::vector<std::string> callees;
};

struct ArchitectureSpec {
  std::vector<ServiceNode> services;
  // Operator-facing direction: each monitoring metric lists the meta
  // metrics it measures. Several entries mark a multi-derived metric.
  std::map<MetricId, std::set<MetaMetric>> mapping;
};

using Skeleton = Dag<MetaMetric>;

// Meta-metric graph implied by the call graph.
//
// Within a service: Traffic -> {Saturation, Latency, Errors},
// Saturation -> {Latency, Errors}, Latency -> Errors.
//
// For each caller -> callee pair the callee is treated as a resource of the
// caller: its meta metrics take the place of the part of the caller's
// Saturation that measures the callee. So caller.Traffic -> callee.Traffic,
// and every callee dimension feeds caller.Latency and caller.Errors (which
// includes callee.Latency -> caller.Latency and callee.Errors ->
// caller.Errors). The caller keeps its own Saturation node for its local
// resources.
//
// Throws CyclicCallGraph on a call cycle, UnknownService for an undeclared
// callee, InvalidArgument for empty or duplicate service names.
Skeleton build_skeleton(std::span<const ServiceNode> services);

// Plugs monitoring metrics into the skeleton and returns the metric-level
// causal graph.
//
// Meta metrics are visited in the skeleton's topological order (Kahn with
// (service, dim) tie-break). For each one:
//   - its parents' (possibly forwarded) metrics become parents of its own
//     metrics;
//   - a metric mapped to several meta metrics is skipped at every host except
//     the last one in that order, where it receives edges from the other
//     hosts' metrics and then acts as an extra parent for this host's other
//     metrics;
//   - an Errors meta metric also collects the metrics of its Errors parents;
//   - a meta metric with no metrics of its own forwards its parents' metrics
//     to its children.
//
// Throws UnknownMetaMetric when the mapping references a service or meta
// metric outside the skeleton.
CausalGraph build_structural_graph(const ArchitectureSpec& spec);

// arch.yaml:
//   services: [{name, callees: [...]}]
//   metrics:  [{name, maps_to: [{service, dim}]}]   dim in traffic|saturation|latency|errors
// Throws ParseError with the offending line number.
ArchitectureSpec parse_architecture(const std::string& yaml_text);
ArchitectureSpec load_architecture(const std::string& path);

}  // namespace circa
