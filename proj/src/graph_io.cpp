#include <fstream>
#include <sstream>

#include <json.hpp>

#include "circa/graph.hpp"
#include "circa/io_util.hpp"

namespace circa {

using nlohmann::json;

std::string graph_to_json(const CausalGraph& graph) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : graph.nodes()) doc["nodes"].push_back(n.str());
  doc["edges"] = json::array();
  for (const auto& [from, to] : graph.edges()) doc["edges"].push_back({from.str(), to.str()});
  return doc.dump(2) + "\n";
}

CausalGraph graph_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph.json: ") + e.what());
  }
  try {
    std::set<MetricId> nodes;
    std::set<CausalGraph::Edge> edges;
    for (const auto& n : doc.at("nodes")) nodes.insert(MetricId(n.get<std::string>()));
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::ParseError, "graph.json: edge must be a pair");
      edges.emplace(MetricId(e[0].get<std::string>()), MetricId(e[1].get<std::string>()));
    }
    return CausalGraph(std::move(nodes), std::move(edges));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph.json: ") + e.what());
  }
}

CausalGraph load_graph(const std::string& path) { return graph_from_json(read_file(path)); }

void save_graph(const CausalGraph& graph, const std::string& path) { write_file(path, graph_to_json(graph)); }

}  // namespace circa
