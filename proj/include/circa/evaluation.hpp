#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "circa/graph.hpp"
#include "circa/model.hpp"
#include "circa/scoring.hpp"
#include "circa/simulation.hpp"

namespace circa {

// Mean over cases of |truth ∩ top-k(ranking)| / |truth|. A ranking shorter
// than k contributes all of its entries.
// Throws EmptyCaseSet for no cases, InvalidArgument for k == 0 or
// misaligned inputs.
double ac_at_k(std::span<const Ranking> rankings, std::span<const GroundTruth> truths, std::size_t k);

// (1/K) sum_{k=1..K} AC@k.
double avg_at_k(std::span<const Ranking> rankings, std::span<const GroundTruth> truths, std::size_t max_k);

struct EvalGraph {
  std::string id;
  CausalGraph graph;
  std::vector<Case> cases;
};

struct EvalDataset {
  std::vector<EvalGraph> graphs;
};

// Reads dataset/<graph_id>/graph.json and every case directory beside it.
// Graph and case directories are visited in name order.
EvalDataset load_dataset(const std::string& dir);
EvalDataset to_eval_dataset(std::vector<SimulatedGraph> graphs);

struct SliceReport {
  std::size_t cases = 0;
  std::vector<double> ac;  // AC@1..AC@K over the pooled cases of the slice
};

struct MethodReport {
  std::string method;
  std::vector<std::vector<double>> graph_ac;  // [graph][k - 1]
  std::vector<double> ac_mean;                // across graphs
  std::vector<double> ac_std;
  double avg_mean = 0.0;
  double avg_std = 0.0;
  double time_mean = 0.0;  // seconds per case, scoring only
  double time_std = 0.0;   // across graphs
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::map<std::string, SliceReport> by_fault_type;
};

struct EvalReport {
  std::size_t k = 5;
  std::size_t graphs = 0;
  std::vector<MethodReport> methods;
};

struct EvalOptions {
  std::size_t k = 5;
  std::size_t jobs = 0;  // 0 = hardware concurrency
};

// Runs each scorer on every case with ground truth. AC@k is computed per
// graph, then averaged across graphs (std is the population std across
// graphs). Cases whose scorer throws are counted in `failures` and left out.
EvalReport evaluate(const EvalDataset& dataset, std::span<const ScorerConfig> scorers, const EvalOptions& options);

// Full report as JSON. Timing fields are omitted when include_timing is
// false so that repeated runs compare byte for byte.
std::string report_json(const EvalReport& report, bool include_timing = true);
// Aligned table: method, AC@1, AC@K, Avg@K, T.
std::string report_table(const EvalReport& report);
// Per-fault-type AC@1 / AC@K table.
std::string fault_type_table(const EvalReport& report);

}  // namespace circa
