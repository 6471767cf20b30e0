#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "circa/graph.hpp"
#include "circa/model.hpp"

namespace circa {

using PropagationMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Linear structural VAR model x(t) = A x(t) + beta x(t-1) + eps(t).
//
// A(i, j) != 0 means metric j causes metric i. Node 0 is the SLI and has no
// children. Every edge goes from a higher index to a lower one, so A is
// strictly upper triangular and I - A is always invertible.
struct WeightedDag {
  Eigen::MatrixXd weights;    // A, n x n
  Eigen::VectorXd noise_std;  // sigma_i of eps_i
  double beta = 0.1;

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights.rows()); }
  std::size_t edge_count() const;

  // W = (I - A)^-1; W(i, j) is the total effect of a unit change of x_j on x_i.
  // Entries grow quickly with graph density (beyond 1e9 at 500 nodes and
  // 5000 edges), so W is computed and returned in extended precision.
  PropagationMatrix propagation() const;
  // Row 0 of W: the total effect of every node on the SLI.
  Eigen::VectorXd sli_effects() const;

  MetricId metric(std::size_t node) const;
  std::vector<MetricId> metrics() const;
  CausalGraph graph() const;
};

// Node names are "x" followed by the zero-padded index, e.g. x00..x49.
std::string node_name(std::size_t node, std::size_t node_count);

struct DagOptions {
  double min_weight = 0.5;   // |A_ij| ~ U(min_weight, max_weight), random sign
  double max_weight = 2.0;
  double noise_scale = 1.0;  // sigma_i ~ Exponential(mean = noise_scale)
  double noise_floor = 0.01;
  double beta = 0.1;
};

// Random connected DAG: a random tree in which node i >= 1 points to a
// uniformly chosen j < i, then extra edges i -> j (i > j) drawn uniformly
// without duplicates until n_edge edges exist.
// Throws EdgeBudgetInfeasible unless n_node - 1 <= n_edge <= n_node (n_node - 1) / 2.
WeightedDag generate_dag(std::size_t n_node, std::size_t n_edge, std::uint64_t seed, const DagOptions& options = {});

// Rows are timestamps, columns are nodes.
using SeriesMatrix = Eigen::MatrixXd;

// x(0) = W eps(0), x(t) = W (beta x(t-1) + eps(t)), eps(t) ~ N(0, diag(sigma^2)).
SeriesMatrix simulate_series(const WeightedDag& dag, std::size_t length, std::uint64_t seed);

enum class FaultType { Weak, Mixed, Strong };

std::string_view to_string(FaultType type);

struct InjectedFault {
  std::vector<std::size_t> root_causes;  // ascending
  std::map<std::size_t, double> alpha;   // a_i per root cause
  std::size_t start = 0;
  std::size_t duration = 2;
  FaultType fault_type = FaultType::Weak;
};

struct FaultOptions {
  double poisson_rate = 1.0;  // |M| - 1 ~ Poisson(rate)
  double min_alpha = 3.0;     // |a_i| ~ U(min_alpha, max_alpha), random sign
  double max_alpha = 10.0;
  double sli_sigmas = 3.0;    // required expected SLI shift, in reference std units
  std::size_t duration = 2;
  int max_attempts = 100;
  // Samples used for the reference standard deviations. Defaults to every
  // sample before the fault.
  std::optional<IndexRange> reference;
};

// Shifts the noise of each root cause i by a_i sigma_i for `duration` samples
// starting at `at` and propagates the effect through W and beta. Root causes
// exclude the SLI. The a_i are scaled up, if needed, so the expected SLI
// shift |sum_i W(0, i) a_i sigma_i| reaches sli_sigmas times the SLI's
// reference standard deviation. Samples before `at` are left untouched.
//
// Throws NoEffectiveFault when repeated draws never reach the SLI,
// InvalidArgument when the fault window does not fit in the series.
struct FaultInjection {
  SeriesMatrix series;
  InjectedFault fault;
};
FaultInjection inject_fault(const WeightedDag& dag, const SeriesMatrix& series, std::size_t at, std::uint64_t seed,
                            const FaultOptions& options = {});

// Standard deviation of every column over `rows`.
Eigen::VectorXd column_std(const SeriesMatrix& series, IndexRange rows);

// Weak if |W(0, i)| sigma_hat_i / sigma_hat_0 < 1 for every root cause,
// Strong if > 1 for every root cause, Mixed otherwise.
FaultType classify_fault(const WeightedDag& dag, std::span<const double> sigma_hat,
                         std::span<const std::size_t> root_causes);

// Independent stream per (master, graph, case) triple.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t graph_index, std::uint64_t case_index);
inline constexpr std::uint64_t kGraphStream = ~std::uint64_t{0};

struct DatasetParams {
  std::size_t n_node = 50;
  std::size_t n_edge = 100;
  std::size_t n_graphs = 10;
  std::size_t cases_per_graph = 100;
  std::uint64_t seed = 0;
  WindowConfig windows;
  DagOptions dag;
  FaultOptions fault;
};

struct SimulatedCase {
  Case data;
  InjectedFault fault;
};

struct SimulatedGraph {
  std::string id;
  WeightedDag dag;
  std::vector<SimulatedCase> cases;
};

// Builds one case per (graph, case) pair: a fresh series of
// t_ref + t_delay + 1 samples starting at minute 0 with the fault injected
// at t_d = t_ref. Graphs are produced one at a time and handed to `sink`.
void generate_dataset(const DatasetParams& params, std::size_t jobs,
                      const std::function<void(SimulatedGraph&&)>& sink);
std::vector<SimulatedGraph> generate_dataset(const DatasetParams& params, std::size_t jobs = 1);

SimulatedGraph generate_graph(const DatasetParams& params, std::size_t graph_index, std::size_t jobs = 1);

// graph.json for a simulated graph: nodes, edges, plus "weights" (parallel
// to edges), "sigma" (per node, in node order) and "beta".
std::string weighted_dag_json(const WeightedDag& dag);
WeightedDag weighted_dag_from_json(const std::string& text);

// dataset/<graph_id>/graph.json and dataset/<graph_id>/<case_id>/{data.csv,case.json}.
void write_graph(const SimulatedGraph& graph, const std::string& dataset_dir);
void write_manifest(const DatasetParams& params, const std::string& dataset_dir);

}  // namespace circa
