#include "circa/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <json.hpp>

#include "circa/case_io.hpp"
#include "circa/errors.hpp"
#include "circa/io_util.hpp"
#include "circa/parallel.hpp"

namespace circa {

using nlohmann::json;

namespace {

std::size_t digits(std::size_t value) {
  std::size_t d = 1;
  while (value >= 10) {
    value /= 10;
    ++d;
  }
  return d;
}

std::string padded(std::string_view prefix, std::size_t index, std::size_t width) {
  std::string number = std::to_string(index);
  if (number.size() < width) number.insert(0, width - number.size(), '0');
  return std::string(prefix) + number;
}

// Parents of each node as (index, weight); all parents have larger indices.
std::vector<std::vector<std::pair<std::size_t, double>>> parent_lists(const WeightedDag& dag) {
  const std::size_t n = dag.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> parents(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = dag.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w != 0.0) parents[i].emplace_back(j, w);
    }
  }
  return parents;
}

// Solves (I - A) x = rhs in place by back substitution.
void solve_structural(const std::vector<std::vector<std::pair<std::size_t, double>>>& parents, Eigen::VectorXd& x) {
  for (std::size_t i = parents.size(); i-- > 0;) {
    double value = x[static_cast<Eigen::Index>(i)];
    for (const auto& [j, w] : parents[i]) value += w * x[static_cast<Eigen::Index>(j)];
    x[static_cast<Eigen::Index>(i)] = value;
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::size_t WeightedDag::edge_count() const { return static_cast<std::size_t>((weights.array() != 0.0).count()); }

PropagationMatrix WeightedDag::propagation() const {
  const auto n = weights.rows();
  const PropagationMatrix system = PropagationMatrix::Identity(n, n) - weights.cast<long double>();
  return system.triangularView<Eigen::UnitUpper>().solve(PropagationMatrix::Identity(n, n));
}

Eigen::VectorXd WeightedDag::sli_effects() const {
  // W = I + W A, so W(0, j) = [j == 0] + sum_{k < j} W(0, k) A(k, j).
  const auto n = weights.rows();
  std::vector<long double> row(static_cast<std::size_t>(n), 0.0L);
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    long double value = j == 0 ? 1.0L : 0.0L;
    for (Eigen::Index k = 0; k < j; ++k) {
      if (weights(k, j) != 0.0) value += row[static_cast<std::size_t>(k)] * weights(k, j);
    }
    row[static_cast<std::size_t>(j)] = value;
    out[j] = static_cast<double>(value);
  }
  return out;
}

std::string node_name(std::size_t node, std::size_t node_count) {
  return padded("x", node, digits(node_count > 0 ? node_count - 1 : 0));
}

MetricId WeightedDag::metric(std::size_t node) const { return MetricId(node_name(node, size())); }

std::vector<MetricId> WeightedDag::metrics() const {
  std::vector<MetricId> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(metric(i));
  return out;
}

CausalGraph WeightedDag::graph() const {
  const auto names = metrics();
  std::set<MetricId> nodes(names.begin(), names.end());
  std::set<CausalGraph::Edge> edges;
  const auto parents = parent_lists(*this);
  for (std::size_t i = 0; i < parents.size(); ++i) {
    for (const auto& [j, w] : parents[i]) edges.emplace(names[j], names[i]);
  }
  return CausalGraph(std::move(nodes), std::move(edges));
}

WeightedDag generate_dag(std::size_t n_node, std::size_t n_edge, std::uint64_t seed, const DagOptions& options) {
  if (n_node == 0) throw Error(ErrorCode::EdgeBudgetInfeasible, "need at least one node");
  const std::size_t max_edges = n_node * (n_node - 1) / 2;
  if (n_edge + 1 < n_node || n_edge > max_edges) {
    throw Error(ErrorCode::EdgeBudgetInfeasible, std::to_string(n_edge) + " edges for " + std::to_string(n_node) +
                                                     " nodes (need " + std::to_string(n_node - 1) + ".." +
                                                     std::to_string(max_edges) + ")");
  }
  std::mt19937_64 rng(seed);
  const auto n = static_cast<Eigen::Index>(n_node);
  std::vector<std::vector<bool>> present(n_node, std::vector<bool>(n_node, false));
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (cause, effect), cause > effect

  for (std::size_t i = 1; i < n_node; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    present[i][j] = true;
    edges.emplace_back(i, j);
  }

  constexpr int kMaxRejections = 64;
  std::uniform_int_distribution<std::size_t> pick(0, n_node - 1);
  while (edges.size() < n_edge) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRejections && !placed; ++attempt) {
      std::size_t a = pick(rng);
      std::size_t b = pick(rng);
      if (a == b) continue;
      if (a < b) std::swap(a, b);
      if (present[a][b]) continue;
      present[a][b] = true;
      edges.emplace_back(a, b);
      placed = true;
    }
    if (placed) continue;
    // Dense graphs: draw uniformly among the remaining pairs instead.
    std::vector<std::pair<std::size_t, std::size_t>> free;
    for (std::size_t a = 1; a < n_node; ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        if (!present[a][b]) free.emplace_back(a, b);
      }
    }
    const auto [a, b] = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    present[a][b] = true;
    edges.emplace_back(a, b);
  }

  WeightedDag dag;
  dag.beta = options.beta;
  dag.weights = Eigen::MatrixXd::Zero(n, n);
  std::uniform_real_distribution<double> magnitude(options.min_weight, options.max_weight);
  std::bernoulli_distribution negative(0.5);
  for (const auto& [cause, effect] : edges) {
    const double w = magnitude(rng);
    dag.weights(static_cast<Eigen::Index>(effect), static_cast<Eigen::Index>(cause)) = negative(rng) ? -w : w;
  }
  dag.noise_std.resize(n);
  std::exponential_distribution<double> spread(1.0 / options.noise_scale);
  for (Eigen::Index i = 0; i < n; ++i) dag.noise_std[i] = std::max(spread(rng), options.noise_floor);
  return dag;
}

SeriesMatrix simulate_series(const WeightedDag& dag, std::size_t length, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(dag.size());
  const auto parents = parent_lists(dag);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SeriesMatrix series(static_cast<Eigen::Index>(length), n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(length); ++t) {
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs[i] = dag.beta * x[i] + dag.noise_std[i] * normal(rng);
    solve_structural(parents, rhs);
    x = rhs;
    series.row(t) = x.transpose();
  }
  return series;
}

std::string_view to_string(FaultType type) {
  switch (type) {
    case FaultType::Weak: return "Weak";
    case FaultType::Mixed: return "Mixed";
    case FaultType::Strong: return "Strong";
  }
  return "?";
}

Eigen::VectorXd column_std(const SeriesMatrix& series, IndexRange rows) {
  const auto block = series.middleRows(static_cast<Eigen::Index>(rows.begin), static_cast<Eigen::Index>(rows.size()));
  const Eigen::RowVectorXd mu = block.colwise().mean();
  return ((block.rowwise() - mu).array().square().colwise().mean()).sqrt().transpose();
}

FaultType classify_fault(const WeightedDag& dag, std::span<const double> sigma_hat,
                         std::span<const std::size_t> root_causes) {
  if (sigma_hat.size() != dag.size()) throw Error(ErrorCode::DimensionMismatch, "sigma_hat size");
  const Eigen::VectorXd w0 = dag.sli_effects();
  bool all_below = true;
  bool all_above = true;
  for (std::size_t i : root_causes) {
    const double ratio = std::abs(w0[static_cast<Eigen::Index>(i)]) * sigma_hat[i] / sigma_hat[0];
    all_below = all_below && ratio < 1.0;
    all_above = all_above && ratio > 1.0;
  }
  if (all_below) return FaultType::Weak;
  if (all_above) return FaultType::Strong;
  return FaultType::Mixed;
}

FaultInjection inject_fault(const WeightedDag& dag, const SeriesMatrix& series, std::size_t at, std::uint64_t seed,
                            const FaultOptions& options) {
  const std::size_t n = dag.size();
  const auto rows = static_cast<std::size_t>(series.rows());
  if (static_cast<std::size_t>(series.cols()) != n) throw Error(ErrorCode::DimensionMismatch, "series width");
  if (at + options.duration > rows) throw Error(ErrorCode::InvalidArgument, "fault window exceeds the series");
  const IndexRange reference = options.reference.value_or(IndexRange{0, at});
  if (reference.size() < 2 || reference.end > rows) throw Error(ErrorCode::InvalidArgument, "bad reference range");
  if (n < 2) throw Error(ErrorCode::NoEffectiveFault, "no candidate root cause besides the SLI");

  const Eigen::VectorXd sigma_hat = column_std(series, reference);
  const Eigen::VectorXd w0 = dag.sli_effects();
  const auto parents = parent_lists(dag);

  std::mt19937_64 rng(seed);
  std::poisson_distribution<std::size_t> extra_roots(options.poisson_rate);
  std::uniform_real_distribution<double> magnitude(options.min_alpha, options.max_alpha);
  std::bernoulli_distribution negative(0.5);
  std::vector<std::size_t> candidates(n - 1);
  std::iota(candidates.begin(), candidates.end(), std::size_t{1});

  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    const std::size_t count = std::min(1 + extra_roots(rng), n - 1);
    InjectedFault fault;
    fault.start = at;
    fault.duration = options.duration;
    std::sample(candidates.begin(), candidates.end(), std::back_inserter(fault.root_causes), count, rng);

    double effect = 0.0;
    double scale = 0.0;
    for (std::size_t i : fault.root_causes) {
      const double a = magnitude(rng) * (negative(rng) ? -1.0 : 1.0);
      fault.alpha[i] = a;
      const double term = w0[static_cast<Eigen::Index>(i)] * a * dag.noise_std[static_cast<Eigen::Index>(i)];
      effect += term;
      scale += std::abs(term);
    }
    if (scale == 0.0 || std::abs(effect) <= 1e-9 * scale) continue;

    const double required = options.sli_sigmas * sigma_hat[0];
    if (std::abs(effect) < required) {
      const double factor = required / std::abs(effect);
      for (auto& [i, a] : fault.alpha) a *= factor;
    }

    FaultInjection out{series, std::move(fault)};
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t t = at; t < rows; ++t) {
      delta *= dag.beta;
      if (t < at + out.fault.duration) {
        for (const auto& [i, a] : out.fault.alpha) {
          delta[static_cast<Eigen::Index>(i)] += a * dag.noise_std[static_cast<Eigen::Index>(i)];
        }
      }
      solve_structural(parents, delta);
      out.series.row(static_cast<Eigen::Index>(t)) += delta.transpose();
    }
    out.fault.fault_type = classify_fault(dag, std::span<const double>(sigma_hat.data(), n), out.fault.root_causes);
    return out;
  }
  throw Error(ErrorCode::NoEffectiveFault, "no sampled root cause set reaches the SLI");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t graph_index, std::uint64_t case_index) {
  return splitmix64(splitmix64(splitmix64(master) ^ graph_index) ^ case_index);
}

SimulatedGraph generate_graph(const DatasetParams& params, std::size_t graph_index, std::size_t jobs) {
  params.windows.validate();
  SimulatedGraph graph;
  graph.id = padded("graph_", graph_index, std::max<std::size_t>(2, digits(params.n_graphs - 1)));
  graph.dag = generate_dag(params.n_node, params.n_edge, derive_seed(params.seed, graph_index, kGraphStream),
                           params.dag);

  const WindowConfig& win = params.windows;
  const auto length = static_cast<std::size_t>(win.t_ref + win.t_delay + 1);
  const auto at = static_cast<std::size_t>(win.t_ref);
  FaultOptions fault_options = params.fault;
  fault_options.reference = IndexRange{0, static_cast<std::size_t>(win.t_ref - win.t_test + 1)};
  const auto names = graph.dag.metrics();

  std::vector<std::optional<SimulatedCase>> cases(params.cases_per_graph);
  parallel_for(params.cases_per_graph, jobs, [&](std::size_t c) {
    const std::uint64_t case_seed = derive_seed(params.seed, graph_index, c);
    const SeriesMatrix base = simulate_series(graph.dag, length, case_seed);
    FaultInjection injected = inject_fault(graph.dag, base, at, splitmix64(case_seed ^ 0x5eedfa17ULL), fault_options);

    std::map<MetricId, TimeSeries> series;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto col = injected.series.col(static_cast<Eigen::Index>(i));
      series.emplace(names[i], TimeSeries{names[i], 0, 1, std::vector<double>(col.begin(), col.end())});
    }
    GroundTruth truth;
    for (std::size_t r : injected.fault.root_causes) truth.root_causes.insert(names[r]);
    cases[c].emplace(SimulatedCase{Case(std::move(series), win.t_ref, win, names[0], std::move(truth),
                                        std::string(to_string(injected.fault.fault_type))),
                                   std::move(injected.fault)});
  });
  graph.cases.reserve(cases.size());
  for (std::size_t c = 0; c < cases.size(); ++c) {
    graph.cases.push_back(std::move(*cases[c]));
  }
  return graph;
}

void generate_dataset(const DatasetParams& params, std::size_t jobs, const std::function<void(SimulatedGraph&&)>& sink) {
  for (std::size_t g = 0; g < params.n_graphs; ++g) sink(generate_graph(params, g, jobs));
}

std::vector<SimulatedGraph> generate_dataset(const DatasetParams& params, std::size_t jobs) {
  std::vector<SimulatedGraph> graphs;
  generate_dataset(params, jobs, [&](SimulatedGraph&& g) { graphs.push_back(std::move(g)); });
  return graphs;
}

std::string weighted_dag_json(const WeightedDag& dag) {
  const auto names = dag.metrics();
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : names) doc["nodes"].push_back(n.str());
  doc["edges"] = json::array();
  doc["weights"] = json::array();
  const CausalGraph g = dag.graph();
  std::map<MetricId, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);
  for (const auto& [from, to] : g.edges()) {
    doc["edges"].push_back({from.str(), to.str()});
    doc["weights"].push_back(
        dag.weights(static_cast<Eigen::Index>(index.at(to)), static_cast<Eigen::Index>(index.at(from))));
  }
  doc["sigma"] = std::vector<double>(dag.noise_std.begin(), dag.noise_std.end());
  doc["beta"] = dag.beta;
  return doc.dump(2) + "\n";
}

WeightedDag weighted_dag_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    std::map<std::string, std::size_t> index;
    const auto& nodes = doc.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].get<std::string>(), i);
    const auto n = static_cast<Eigen::Index>(nodes.size());
    WeightedDag dag;
    dag.weights = Eigen::MatrixXd::Zero(n, n);
    const auto& edges = doc.at("edges");
    const auto& weights = doc.at("weights");
    if (edges.size() != weights.size()) throw Error(ErrorCode::ParseError, "graph.json: weights do not match edges");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto from = index.at(edges[k].at(0).get<std::string>());
      const auto to = index.at(edges[k].at(1).get<std::string>());
      if (from <= to) throw Error(ErrorCode::ParseError, "graph.json: edges must point to lower node indices");
      dag.weights(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = weights[k].get<double>();
    }
    const auto sigma = doc.at("sigma").get<std::vector<double>>();
    if (sigma.size() != nodes.size()) throw Error(ErrorCode::ParseError, "graph.json: sigma size");
    dag.noise_std = Eigen::Map<const Eigen::VectorXd>(sigma.data(), n);
    dag.beta = doc.at("beta").get<double>();
    return dag;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph.json: ") + e.what());
  } catch (const std::out_of_range&) {
    throw Error(ErrorCode::ParseError, "graph.json: edge references an unknown node");
  }
}

void write_graph(const SimulatedGraph& graph, const std::string& dataset_dir) {
  const std::filesystem::path base = std::filesystem::path(dataset_dir) / graph.id;
  write_file((base / "graph.json").string(), weighted_dag_json(graph.dag));
  const std::size_t width = std::max<std::size_t>(3, digits(graph.cases.size() > 0 ? graph.cases.size() - 1 : 0));
  for (std::size_t c = 0; c < graph.cases.size(); ++c) {
    write_case(graph.cases[c].data, (base / padded("case_", c, width)).string());
  }
}

void write_manifest(const DatasetParams& params, const std::string& dataset_dir) {
  json doc;
  doc["generator"] = "circa simulate";
  doc["nodes"] = params.n_node;
  doc["edges"] = params.n_edge;
  doc["graphs"] = params.n_graphs;
  doc["cases_per_graph"] = params.cases_per_graph;
  doc["seed"] = params.seed;
  doc["t_ref"] = params.windows.t_ref;
  doc["t_delay"] = params.windows.t_delay;
  doc["t_test"] = params.windows.t_test;
  doc["beta"] = params.dag.beta;
  doc["weight_range"] = {params.dag.min_weight, params.dag.max_weight};
  doc["noise_scale"] = params.dag.noise_scale;
  doc["noise_floor"] = params.dag.noise_floor;
  doc["poisson_rate"] = params.fault.poisson_rate;
  doc["alpha_range"] = {params.fault.min_alpha, params.fault.max_alpha};
  doc["sli_sigmas"] = params.fault.sli_sigmas;
  doc["fault_duration"] = params.fault.duration;
  write_file((std::filesystem::path(dataset_dir) / "manifest.json").string(), doc.dump(2) + "\n");
}

}  // namespace circa
