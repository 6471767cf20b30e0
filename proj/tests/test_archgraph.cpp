#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "circa/archgraph.hpp"
#include "circa/errors.hpp"
#include "circa/io_util.hpp"

using namespace circa;
using enum MetaMetricDim;

namespace {

std::set<CausalGraph::Edge> read_edges(const std::string& path) {
  std::istringstream in(read_file(path));
  std::set<CausalGraph::Edge> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string from, to;
    fields >> from >> to;
    edges.emplace(from, to);
  }
  return edges;
}

MetaMetric mm(const std::string& s, MetaMetricDim d) { return {s, d}; }

}  // namespace

TEST(Skeleton, SingleServiceHasTheSixWithinServiceEdges) {
  const std::vector<ServiceNode> services{{"S", {}}};
  const Skeleton sk = build_skeleton(services);
  EXPECT_EQ(sk.nodes().size(), 4u);
  const std::set<Skeleton::Edge> expected{
      {mm("S", Traffic), mm("S", Saturation)}, {mm("S", Traffic), mm("S", Latency)},
      {mm("S", Traffic), mm("S", Errors)},     {mm("S", Saturation), mm("S", Latency)},
      {mm("S", Saturation), mm("S", Errors)},  {mm("S", Latency), mm("S", Errors)},
  };
  EXPECT_EQ(sk.edges(), expected);
}

TEST(Skeleton, CallerCalleeRules) {
  const std::vector<ServiceNode> services{{"WEB", {"DB"}}, {"DB", {}}};
  const Skeleton sk = build_skeleton(services);
  EXPECT_TRUE(sk.has_edge(mm("WEB", Traffic), mm("DB", Traffic)));
  EXPECT_TRUE(sk.has_edge(mm("DB", Latency), mm("WEB", Latency)));
  EXPECT_TRUE(sk.has_edge(mm("DB", Errors), mm("WEB", Errors)));
  // The callee stands in for part of the caller's saturation.
  for (auto dim : {Traffic, Saturation, Latency, Errors}) {
    EXPECT_TRUE(sk.has_edge(mm("DB", dim), mm("WEB", Latency)));
    EXPECT_TRUE(sk.has_edge(mm("DB", dim), mm("WEB", Errors)));
  }
  EXPECT_FALSE(sk.has_edge(mm("DB", Traffic), mm("WEB", Traffic)));
  EXPECT_TRUE(sk.contains(mm("WEB", Saturation)));
  EXPECT_EQ(sk.edges().size(), 12u + 1u + 8u);
  const std::vector<MetaMetric> order{mm("WEB", Traffic), mm("DB", Traffic),      mm("DB", Saturation),
                                      mm("DB", Latency),  mm("DB", Errors),       mm("WEB", Saturation),
                                      mm("WEB", Latency), mm("WEB", Errors)};
  EXPECT_EQ(sk.topological_order(), order);
}

TEST(Skeleton, EmptyAndInvalidCallGraphs) {
  EXPECT_TRUE(build_skeleton({}).nodes().empty());
  auto code_of = [](std::vector<ServiceNode> services) {
    try {
      build_skeleton(services);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code_of({{"A", {"B"}}, {"B", {"A"}}}), ErrorCode::CyclicCallGraph);
  EXPECT_EQ(code_of({{"A", {"A"}}}), ErrorCode::CyclicCallGraph);
  EXPECT_EQ(code_of({{"A", {"B"}}, {"B", {"C"}}, {"C", {"A"}}}), ErrorCode::CyclicCallGraph);
  EXPECT_EQ(code_of({{"A", {"NOPE"}}}), ErrorCode::UnknownService);
}

TEST(StructuralGraph, ThreeMetricWebDbExample) {
  ArchitectureSpec spec;
  spec.services = {{"WEB", {"DB"}}, {"DB", {}}};
  spec.mapping = {{"web_qps", {mm("WEB", Traffic)}},
                  {"web_latency", {mm("WEB", Latency)}},
                  {"db_qps", {mm("DB", Traffic)}}};
  const CausalGraph g = build_structural_graph(spec);
  const std::set<CausalGraph::Edge> expected{
      {"web_qps", "db_qps"}, {"web_qps", "web_latency"}, {"db_qps", "web_latency"}};
  EXPECT_EQ(g.edges(), expected);
  EXPECT_EQ(g.nodes().size(), 3u);
}

TEST(StructuralGraph, WebDbGolden) {
  const ArchitectureSpec spec = load_architecture(CIRCA_TEST_DATA_DIR "/web_db.yaml");
  const CausalGraph g = build_structural_graph(spec);
  EXPECT_EQ(g.edges(), read_edges(CIRCA_TEST_DATA_DIR "/web_db_edges.txt"));
  EXPECT_EQ(g.nodes().size(), 8u);
  EXPECT_EQ(g.topological_order().size(), g.nodes().size());
}

TEST(StructuralGraph, MultiDerivedMetricHasProxyEdgesOnly) {
  const ArchitectureSpec spec = load_architecture(CIRCA_TEST_DATA_DIR "/web_db.yaml");
  const CausalGraph g = build_structural_graph(spec);
  const MetricId dapr("db_access_per_request");
  EXPECT_EQ(g.parents(dapr), (std::set<MetricId>{"web_qps"}));
  EXPECT_EQ(g.children(dapr), (std::set<MetricId>{"db_qps"}));
  EXPECT_FALSE(g.has_edge(dapr, dapr));
}

TEST(StructuralGraph, EmptyMetaMetricsForwardParents) {
  // A -> B -> C chain with metrics only on A.traffic and C.latency. Both the
  // B and C traffic meta metrics are empty, so A's traffic metric reaches
  // C's latency metric via forwarding.
  ArchitectureSpec spec;
  spec.services = {{"A", {"B"}}, {"B", {"C"}}, {"C", {}}};
  spec.mapping = {{"a_qps", {mm("A", Traffic)}}, {"c_lat", {mm("C", Latency)}}};
  const CausalGraph g = build_structural_graph(spec);
  EXPECT_EQ(g.edges(), (std::set<CausalGraph::Edge>{{"a_qps", "c_lat"}}));
}

TEST(StructuralGraph, ErrorsAccumulateAlongCallChain) {
  // One metric per meta metric on the chain A -> B -> C. B.errors carries
  // C's errors metric forward, so A's latency and errors metrics gain an
  // extra parent each on top of the skeleton's product edges.
  ArchitectureSpec spec;
  spec.services = {{"A", {"B"}}, {"B", {"C"}}, {"C", {}}};
  for (const std::string s : {"A", "B", "C"}) {
    for (auto dim : {Traffic, Saturation, Latency, Errors}) {
      spec.mapping[MetricId(s + "_" + std::string(to_string(dim)))] = {mm(s, dim)};
    }
  }
  const CausalGraph g = build_structural_graph(spec);
  const Skeleton sk = build_skeleton(spec.services);
  EXPECT_EQ(sk.edges().size(), 36u);
  EXPECT_EQ(g.edges().size(), 36u + 2u);
  EXPECT_TRUE(g.has_edge("C_errors", "A_latency"));
  EXPECT_TRUE(g.has_edge("C_errors", "A_errors"));
}

TEST(StructuralGraph, ZeroMetricsGiveEmptyGraph) {
  ArchitectureSpec spec;
  spec.services = {{"WEB", {"DB"}}, {"DB", {}}};
  const CausalGraph g = build_structural_graph(spec);
  EXPECT_TRUE(g.nodes().empty());
  EXPECT_TRUE(g.edges().empty());
}

TEST(StructuralGraph, UnknownMetaMetric) {
  ArchitectureSpec spec;
  spec.services = {{"WEB", {}}};
  spec.mapping = {{"m", {mm("DB", Traffic)}}};
  try {
    build_structural_graph(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownMetaMetric);
  }
}

TEST(StructuralGraph, RandomSpecsAreDagsAndOrderIndependent) {
  std::mt19937_64 rng(5);
  const std::array dims{Traffic, Saturation, Latency, Errors};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_services = 1 + static_cast<std::size_t>(trial % 6);
    std::vector<ServiceNode> services;
    for (std::size_t i = 0; i < n_services; ++i) services.push_back({"s" + std::to_string(i), {}});
    // Calls only go to higher indices, so the call graph is acyclic.
    for (std::size_t i = 0; i < n_services; ++i) {
      for (std::size_t j = i + 1; j < n_services; ++j) {
        if (std::bernoulli_distribution(0.4)(rng)) services[i].callees.push_back(services[j].service);
      }
    }
    ArchitectureSpec spec;
    spec.services = services;
    const std::size_t n_metrics = std::uniform_int_distribution<std::size_t>(0, 12)(rng);
    for (std::size_t m = 0; m < n_metrics; ++m) {
      std::set<MetaMetric> hosts;
      const std::size_t n_hosts = std::bernoulli_distribution(0.2)(rng) ? 2 : 1;
      while (hosts.size() < n_hosts) {
        const auto s = std::uniform_int_distribution<std::size_t>(0, n_services - 1)(rng);
        hosts.insert({services[s].service, dims[std::uniform_int_distribution<std::size_t>(0, 3)(rng)]});
      }
      spec.mapping[MetricId("m" + std::to_string(m))] = hosts;
    }
    const CausalGraph g = build_structural_graph(spec);
    EXPECT_EQ(g.topological_order().size(), g.nodes().size());
    std::set<MetricId> expected_nodes;
    for (const auto& [id, hosts] : spec.mapping) expected_nodes.insert(id);
    EXPECT_EQ(g.nodes(), expected_nodes);

    ArchitectureSpec shuffled = spec;
    std::shuffle(shuffled.services.begin(), shuffled.services.end(), rng);
    for (auto& s : shuffled.services) std::shuffle(s.callees.begin(), s.callees.end(), rng);
    EXPECT_EQ(build_structural_graph(shuffled).edges(), g.edges()) << "trial " << trial;
  }
}

TEST(ArchYaml, ParsesAndReportsLines) {
  const ArchitectureSpec spec = parse_architecture(R"(
services:
  - name: WEB
    callees: [DB]
  - name: DB
metrics:
  - name: q
    maps_to: [{service: WEB, dim: traffic}, {service: DB, dim: traffic}]
)");
  ASSERT_EQ(spec.services.size(), 2u);
  EXPECT_EQ(spec.services[0].callees, std::vector<std::string>{"DB"});
  EXPECT_EQ(spec.mapping.at("q").size(), 2u);

  try {
    parse_architecture("services:\n  - name: A\nmetrics:\n  - name: m\n    maps_to: [{service: A, dim: speed}]\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("arch.yaml:5"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_architecture("metrics:\n  - name: m\n"), Error);
  EXPECT_THROW(parse_architecture("services: [unclosed"), Error);
  EXPECT_TRUE(parse_architecture("").mapping.empty());
}
