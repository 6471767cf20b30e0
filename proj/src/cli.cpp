#include "circa/cli.hpp"

#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "circa/archgraph.hpp"
#include "circa/case_io.hpp"
#include "circa/errors.hpp"
#include "circa/evaluation.hpp"
#include "circa/io_util.hpp"
#include "circa/scoring.hpp"
#include "circa/simulation.hpp"

namespace circa {

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct WindowFlags {
  std::optional<Minutes> t_ref;
  std::optional<Minutes> t_delay;
  std::optional<Minutes> t_test;

  void add(CLI::App* cmd) {
    cmd->add_option("--t-ref", t_ref, "Reference span before detection, minutes (default 120)");
    cmd->add_option("--t-delay", t_delay, "Delay between detection and analysis, minutes (default 5)");
    cmd->add_option("--t-test", t_test, "Length of the test range, minutes (default 10)");
  }
  bool any() const { return t_ref || t_delay || t_test; }
  WindowConfig apply(WindowConfig base) const {
    if (t_ref) base.t_ref = *t_ref;
    if (t_delay) base.t_delay = *t_delay;
    if (t_test) base.t_test = *t_test;
    base.validate();
    return base;
  }
};

Case with_windows(const Case& c, const WindowFlags& flags) {
  if (!flags.any()) return c;
  return Case(c.series(), c.detect_time(), flags.apply(c.windows()), c.sli(), c.truth(), c.fault_type());
}

struct ScorerFlags {
  std::optional<bool> lagged_self;
  std::optional<bool> adjust;
  double threshold = kAbnormalThreshold;
  std::string regressor = "linear";

  void add(CLI::App* cmd) {
    cmd->add_flag("--lagged-self,!--no-lagged-self", lagged_self, "Add each metric's previous value as a feature");
    cmd->add_flag("--adjust,!--no-adjust", adjust, "Apply descendant adjustment");
    cmd->add_option("--threshold", threshold, "Abnormality threshold (default 3)");
    cmd->add_option("--regressor", regressor, "Regression backend (default linear)");
  }
  ScorerConfig resolve(const std::string& name) const {
    ScorerConfig config = scorer_config(name);
    if (lagged_self) config.use_lagged_self = *lagged_self;
    if (adjust) config.adjust = *adjust;
    config.threshold = threshold;
    config.regressor = regressor;
    return config;
  }
};

std::string fmt_score(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << v;
  return out.str();
}

struct SimulateArgs {
  std::size_t nodes = 50;
  std::size_t edges = 100;
  std::size_t graphs = 10;
  std::size_t cases = 100;
  std::uint64_t seed = 0;
  std::string out;
  WindowFlags windows;
};

int cmd_simulate(const SimulateArgs& args, std::size_t jobs, std::ostream& out) {
  DatasetParams params;
  params.n_node = args.nodes;
  params.n_edge = args.edges;
  params.n_graphs = args.graphs;
  params.cases_per_graph = args.cases;
  params.seed = args.seed;
  params.windows = args.windows.apply(WindowConfig{});
  // Validate the budget before touching the output directory.
  generate_dag(params.n_node, params.n_edge, params.seed);

  std::filesystem::create_directories(args.out);
  write_manifest(params, args.out);
  std::map<std::string, std::size_t> types;
  std::size_t total = 0;
  generate_dataset(params, jobs, [&](SimulatedGraph&& g) {
    write_graph(g, args.out);
    for (const auto& c : g.cases) ++types[std::string(to_string(c.fault.fault_type))];
    total += g.cases.size();
  });
  out << "wrote " << total << " cases in " << params.n_graphs << " graphs to " << args.out << "\n";
  for (const auto& [type, n] : types) out << "  " << type << ": " << n << "\n";
  return 0;
}

int cmd_graph(const std::string& arch_file, const std::string& out_file, std::ostream& out, std::ostream& err) {
  const ArchitectureSpec spec = load_architecture(arch_file);
  if (spec.mapping.empty()) err << "warning: " << arch_file << " maps no metrics; the graph is empty\n";
  const CausalGraph graph = build_structural_graph(spec);
  save_graph(graph, out_file);
  out << "nodes: " << graph.nodes().size() << "\nedges: " << graph.edges().size() << "\n";
  return 0;
}

struct AnalyzeArgs {
  std::string case_dir;
  std::string graph_file;
  std::string scorer = "circa";
  std::string out;
  std::size_t top = 10;
  WindowFlags windows;
  ScorerFlags options;
};

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out) {
  const ScorerConfig config = args.options.resolve(args.scorer);
  const Case c = with_windows(read_case(args.case_dir), args.windows);
  const bool needs_graph = config.method != Method::NSigma && config.method != Method::Ideal;
  CausalGraph graph;
  if (needs_graph) {
    if (args.graph_file.empty()) throw Error(ErrorCode::InvalidArgument, "scorer " + args.scorer + " needs --graph");
    graph = load_graph(args.graph_file);
  }
  const ScoreResult result = run_scorer(config, c, graph);

  nlohmann::json doc;
  doc["scorer"] = config.name;
  doc["raw"] = nlohmann::json::object();
  for (const auto& [id, s] : result.table.raw) doc["raw"][id.str()] = s;
  if (result.table.adjusted) {
    doc["adjusted"] = nlohmann::json::object();
    for (const auto& [id, s] : *result.table.adjusted) doc["adjusted"][id.str()] = s;
  }
  doc["ranking"] = nlohmann::json::array();
  for (const auto& e : result.ranking) doc["ranking"].push_back({e.metric.str(), e.score});
  const std::string out_file =
      args.out.empty() ? (std::filesystem::path(args.case_dir) / "scores.json").string() : args.out;
  write_file(out_file, doc.dump(2) + "\n");

  out << std::left << std::setw(6) << "rank" << std::setw(32) << "metric" << std::right << std::setw(12) << "raw"
      << std::setw(12) << "adjusted" << "\n";
  for (std::size_t i = 0; i < std::min(args.top, result.ranking.size()); ++i) {
    const auto& id = result.ranking[i].metric;
    const auto raw = result.table.raw.find(id);
    out << std::left << std::setw(6) << (i + 1) << std::setw(32) << id.str() << std::right << std::setw(12)
        << (raw == result.table.raw.end() ? "-" : fmt_score(raw->second)) << std::setw(12)
        << (result.table.adjusted ? fmt_score(result.table.adjusted->at(id)) : "-") << "\n";
  }
  out << "scores written to " << out_file << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string dataset_dir;
  std::vector<std::string> scorers{"rht-pg", "rht", "nsigma", "dfs", "ideal"};
  std::size_t k = 5;
  std::string out;
  bool no_timing = false;
  WindowFlags windows;
  ScorerFlags options;
};

int cmd_evaluate(const EvaluateArgs& args, std::size_t jobs, std::ostream& out, std::ostream& err) {
  std::vector<ScorerConfig> scorers;
  for (const auto& name : args.scorers) scorers.push_back(args.options.resolve(name));
  EvalDataset dataset = load_dataset(args.dataset_dir);
  if (args.windows.any()) {
    for (auto& g : dataset.graphs) {
      for (auto& c : g.cases) c = with_windows(c, args.windows);
    }
  }
  const EvalReport report = evaluate(dataset, scorers, EvalOptions{args.k, jobs});
  const std::string out_file =
      args.out.empty() ? (std::filesystem::path(args.dataset_dir) / "report.json").string() : args.out;
  write_file(out_file, report_json(report, !args.no_timing));
  out << report_table(report);
  if (const std::string types = fault_type_table(report); !types.empty()) out << "\n" << types;
  for (const auto& m : report.methods) {
    if (m.failures > 0) err << "warning: " << m.method << " failed on " << m.failures << " cases\n";
  }
  out << "report written to " << out_file << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Root cause analysis for metric-monitored service systems"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file with option defaults; flags take precedence");
  std::size_t jobs = 0;
  app.add_option("--jobs,-j", jobs, "Worker threads (default: all cores)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a simulated dataset");
  simulate->add_option("--nodes", sim.nodes, "Nodes per graph")->capture_default_str();
  simulate->add_option("--edges", sim.edges, "Edges per graph")->capture_default_str();
  simulate->add_option("--graphs", sim.graphs, "Number of graphs")->capture_default_str();
  simulate->add_option("--cases", sim.cases, "Cases per graph")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Master seed")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  sim.windows.add(simulate);

  std::string arch_file;
  std::string graph_out;
  auto* graph = app.add_subcommand("graph", "Compile an architecture description into graph.json");
  graph->add_option("arch", arch_file, "arch.yaml")->required()->check(CLI::ExistingFile);
  graph->add_option("--out", graph_out, "Output graph.json")->required();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Score and rank the metrics of one case");
  analyze->add_option("--case", an.case_dir, "Case directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--graph", an.graph_file, "graph.json (not needed by nsigma/ideal)");
  analyze->add_option("--scorer", an.scorer, "rht | rht-pg | circa | nsigma | dfs | ideal")->capture_default_str();
  analyze->add_option("--out", an.out, "Output scores.json (default <case>/scores.json)");
  analyze->add_option("--top", an.top, "Rows to print")->capture_default_str();
  an.windows.add(analyze);
  an.options.add(analyze);

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compute AC@k over a labeled dataset");
  evaluate_cmd->add_option("dataset", ev.dataset_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  evaluate_cmd->add_option("--scorers", ev.scorers, "Comma-separated scorer names")->delimiter(',');
  evaluate_cmd->add_option("--k", ev.k, "Largest k for AC@k")->capture_default_str()->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--out", ev.out, "Output report.json (default <dataset>/report.json)");
  evaluate_cmd->add_flag("--no-timing", ev.no_timing, "Leave wall-clock timings out of report.json");
  ev.windows.add(evaluate_cmd);
  ev.options.add(evaluate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  // Argument-level validation: failures here are usage errors.
  try {
    for (const WindowFlags* w : {&sim.windows, &an.windows, &ev.windows}) {
      if (w->any()) w->apply(WindowConfig{});
    }
    if (*analyze) an.options.resolve(an.scorer);
    if (*evaluate_cmd) {
      if (ev.scorers.empty()) throw Error(ErrorCode::InvalidArgument, "--scorers is empty");
      for (const auto& name : ev.scorers) ev.options.resolve(name);
    }
    if (*analyze || *evaluate_cmd) make_regressor(*analyze ? an.options.regressor : ev.options.regressor);
  } catch (const Error& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, jobs, out);
    if (*graph) return cmd_graph(arch_file, graph_out, out, err);
    if (*analyze) return cmd_analyze(an, out);
    if (*evaluate_cmd) return cmd_evaluate(ev, jobs, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace circa
