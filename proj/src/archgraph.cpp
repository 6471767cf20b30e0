#include "circa/archgraph.hpp"

#include <algorithm>
#include <array>

#include <yaml-cpp/yaml.h>

#include "circa/errors.hpp"
#include "circa/io_util.hpp"

namespace circa {

namespace {

constexpr std::array kDims = {MetaMetricDim::Traffic, MetaMetricDim::Saturation, MetaMetricDim::Latency,
                              MetaMetricDim::Errors};

}  // namespace

std::string_view to_string(MetaMetricDim dim) {
  switch (dim) {
    case MetaMetricDim::Traffic: return "traffic";
    case MetaMetricDim::Saturation: return "saturation";
    case MetaMetricDim::Latency: return "latency";
    case MetaMetricDim::Errors: return "errors";
  }
  return "?";
}

std::optional<MetaMetricDim> parse_dim(std::string_view text) {
  for (auto dim : kDims) {
    if (to_string(dim) == text) return dim;
  }
  return std::nullopt;
}

std::string to_string(const MetaMetric& m) { return m.service + "." + std::string(to_string(m.dim)); }

Skeleton build_skeleton(std::span<const ServiceNode> services) {
  using enum MetaMetricDim;
  std::set<std::string> names;
  for (const auto& s : services) {
    if (s.service.empty()) throw Error(ErrorCode::InvalidArgument, "service name must be non-empty");
    if (!names.insert(s.service).second) throw Error(ErrorCode::InvalidArgument, "duplicate service " + s.service);
  }
  std::set<std::pair<std::string, std::string>> calls;
  for (const auto& s : services) {
    for (const auto& callee : s.callees) {
      if (!names.contains(callee)) {
        throw Error(ErrorCode::UnknownService, s.service + " calls undeclared service " + callee);
      }
      if (callee == s.service) throw Error(ErrorCode::CyclicCallGraph, s.service + " calls itself");
      calls.emplace(s.service, callee);
    }
  }
  if (!kahn_order(names, calls)) {
    // Peel off services without callers or without callees; what remains lies on a cycle.
    std::set<std::string> left = names;
    for (bool changed = true; changed;) {
      changed = false;
      for (auto it = left.begin(); it != left.end();) {
        bool has_in = false, has_out = false;
        for (const auto& [from, to] : calls) {
          if (!left.contains(from) || !left.contains(to)) continue;
          has_in = has_in || to == *it;
          has_out = has_out || from == *it;
        }
        if (has_in && has_out) {
          ++it;
        } else {
          it = left.erase(it);
          changed = true;
        }
      }
    }
    std::string listed;
    for (const auto& s : left) listed += (listed.empty() ? "" : ", ") + s;
    throw Error(ErrorCode::CyclicCallGraph, "call graph contains a cycle through " + listed);
  }

  std::set<MetaMetric> nodes;
  std::set<Skeleton::Edge> edges;
  for (const auto& name : names) {
    for (auto dim : kDims) nodes.insert({name, dim});
    auto add = [&](MetaMetricDim from, MetaMetricDim to) { edges.insert({{name, from}, {name, to}}); };
    add(Traffic, Saturation);
    add(Traffic, Latency);
    add(Traffic, Errors);
    add(Saturation, Latency);
    add(Saturation, Errors);
    add(Latency, Errors);
  }
  for (const auto& [caller, callee] : calls) {
    edges.insert({{caller, Traffic}, {callee, Traffic}});
    for (auto dim : kDims) {
      edges.insert({{callee, dim}, {caller, Latency}});
      edges.insert({{callee, dim}, {caller, Errors}});
    }
  }
  return Skeleton(std::move(nodes), std::move(edges));
}

CausalGraph build_structural_graph(const ArchitectureSpec& spec) {
  const Skeleton skeleton = build_skeleton(spec.services);

  std::map<MetaMetric, std::set<MetricId>> monitored;
  std::set<MetricId> metric_nodes;
  for (const auto& [metric, metas] : spec.mapping) {
    if (metas.empty()) throw Error(ErrorCode::InvalidArgument, metric.str() + " maps to no meta metric");
    metric_nodes.insert(metric);
    for (const auto& meta : metas) {
      if (!skeleton.contains(meta)) throw Error(ErrorCode::UnknownMetaMetric, metric.str() + " -> " + to_string(meta));
      monitored[meta].insert(metric);
    }
  }

  const auto& order = skeleton.topological_order();
  std::map<MetaMetric, std::size_t> position;
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;

  auto last_host = [&](const MetricId& metric) {
    const auto& hosts = spec.mapping.at(metric);
    return *std::max_element(hosts.begin(), hosts.end(),
                             [&](const auto& a, const auto& b) { return position[a] < position[b]; });
  };

  std::set<CausalGraph::Edge> edges;
  auto add_edge = [&](const MetricId& from, const MetricId& to) {
    if (from != to) edges.emplace(from, to);
  };

  // Metrics each visited meta metric exposes to its children.
  std::map<MetaMetric, std::set<MetricId>> exposed;
  for (const auto& meta : order) {
    std::set<MetricId> parents_metrics;
    for (const auto& p : skeleton.parents(meta)) {
      const auto& e = exposed[p];
      parents_metrics.insert(e.begin(), e.end());
    }

    std::set<MetricId> own;
    if (auto it = monitored.find(meta); it != monitored.end()) own = it->second;

    if (auto it = monitored.find(meta); it != monitored.end()) {
      for (const auto& metric : it->second) {
        const auto& hosts = spec.mapping.at(metric);
        if (hosts.size() < 2) continue;
        own.erase(metric);
        if (last_host(metric) == meta) {
          for (const auto& other : hosts) {
            if (other == meta) continue;
            for (const auto& m : exposed[other]) add_edge(m, metric);
          }
          parents_metrics.insert(metric);
        }
      }
    }

    for (const auto& from : parents_metrics) {
      for (const auto& to : own) add_edge(from, to);
    }

    if (meta.dim == MetaMetricDim::Errors) {
      for (const auto& p : skeleton.parents(meta)) {
        if (p.dim != MetaMetricDim::Errors) continue;
        const auto& e = exposed[p];
        own.insert(e.begin(), e.end());
      }
    }

    exposed[meta] = own.empty() ? std::move(parents_metrics) : std::move(own);
  }

  try {
    return CausalGraph(std::move(metric_nodes), std::move(edges));
  } catch (const Error& e) {
    throw Error(ErrorCode::ResultNotDag, e.what());
  }
}

namespace {

[[noreturn]] void yaml_error(const YAML::Node& node, const std::string& message) {
  const auto mark = node.Mark();
  const std::string where = mark.is_null() ? std::string("arch.yaml") : "arch.yaml:" + std::to_string(mark.line + 1);
  throw Error(ErrorCode::ParseError, where + ": " + message);
}

std::string required_string(const YAML::Node& parent, const char* key) {
  const YAML::Node value = parent[key];
  if (!value || !value.IsScalar()) yaml_error(parent, std::string("missing string field '") + key + "'");
  return value.as<std::string>();
}

}  // namespace

ArchitectureSpec parse_architecture(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ParseError, "arch.yaml:" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ArchitectureSpec spec;
  if (!root || root.IsNull()) return spec;
  if (!root.IsMap()) yaml_error(root, "top level must be a mapping");

  if (const YAML::Node services = root["services"]; services && !services.IsNull()) {
    if (!services.IsSequence()) yaml_error(services, "'services' must be a list");
    for (const auto& s : services) {
      ServiceNode node{required_string(s, "name"), {}};
      if (const YAML::Node callees = s["callees"]; callees && !callees.IsNull()) {
        if (!callees.IsSequence()) yaml_error(callees, "'callees' must be a list");
        for (const auto& c : callees) node.callees.push_back(c.as<std::string>());
      }
      spec.services.push_back(std::move(node));
    }
  }

  if (const YAML::Node metrics = root["metrics"]; metrics && !metrics.IsNull()) {
    if (!metrics.IsSequence()) yaml_error(metrics, "'metrics' must be a list");
    for (const auto& m : metrics) {
      const std::string name = required_string(m, "name");
      if (name.empty()) yaml_error(m, "metric name must be non-empty");
      const YAML::Node maps_to = m["maps_to"];
      if (!maps_to || !maps_to.IsSequence() || maps_to.size() == 0) {
        yaml_error(m, "metric '" + name + "' needs a non-empty 'maps_to' list");
      }
      std::set<MetaMetric> metas;
      for (const auto& target : maps_to) {
        const std::string dim_text = required_string(target, "dim");
        auto dim = parse_dim(dim_text);
        if (!dim) yaml_error(target, "unknown dim '" + dim_text + "'");
        metas.insert({required_string(target, "service"), *dim});
      }
      if (!spec.mapping.emplace(MetricId(name), std::move(metas)).second) {
        yaml_error(m, "duplicate metric '" + name + "'");
      }
    }
  }
  return spec;
}

ArchitectureSpec load_architecture(const std::string& path) { return parse_architecture(read_file(path)); }

}  // namespace circa
