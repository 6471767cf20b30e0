#include "circa/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "circa/case_io.hpp"
#include "circa/errors.hpp"
#include "circa/io_util.hpp"
#include "circa/parallel.hpp"

namespace circa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kDfsNote = "reimplementation by description";

double recall_at_k(const Ranking& ranking, const GroundTruth& truth, std::size_t k) {
  if (truth.root_causes.empty()) throw Error(ErrorCode::InvalidArgument, "empty ground truth");
  std::size_t hits = 0;
  const std::size_t n = std::min(k, ranking.size());
  for (std::size_t i = 0; i < n; ++i) hits += truth.root_causes.contains(ranking[i].metric) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.root_causes.size());
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  return {mean(values), population_std(values)};
}

std::vector<double> ac_curve(const std::vector<const Ranking*>& rankings, const std::vector<const GroundTruth*>& truths,
                             std::size_t max_k) {
  std::vector<double> curve(max_k, 0.0);
  for (std::size_t c = 0; c < rankings.size(); ++c) {
    for (std::size_t k = 1; k <= max_k; ++k) curve[k - 1] += recall_at_k(*rankings[c], *truths[c], k);
  }
  for (auto& v : curve) v /= static_cast<double>(rankings.size());
  return curve;
}

}  // namespace

double ac_at_k(std::span<const Ranking> rankings, std::span<const GroundTruth> truths, std::size_t k) {
  if (rankings.empty()) throw Error(ErrorCode::EmptyCaseSet, "no cases to evaluate");
  if (rankings.size() != truths.size()) throw Error(ErrorCode::InvalidArgument, "rankings and truths differ in size");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < rankings.size(); ++i) total += recall_at_k(rankings[i], truths[i], k);
  return total / static_cast<double>(rankings.size());
}

double avg_at_k(std::span<const Ranking> rankings, std::span<const GroundTruth> truths, std::size_t max_k) {
  if (max_k == 0) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  double total = 0.0;
  for (std::size_t k = 1; k <= max_k; ++k) total += ac_at_k(rankings, truths, k);
  return total / static_cast<double>(max_k);
}

EvalDataset load_dataset(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir + " is not a directory");
  std::vector<fs::path> graph_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "graph.json")) graph_dirs.push_back(entry.path());
  }
  std::sort(graph_dirs.begin(), graph_dirs.end());
  EvalDataset dataset;
  for (const auto& gdir : graph_dirs) {
    EvalGraph g{gdir.filename().string(), load_graph((gdir / "graph.json").string()), {}};
    std::vector<fs::path> case_dirs;
    for (const auto& entry : fs::directory_iterator(gdir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "case.json")) case_dirs.push_back(entry.path());
    }
    std::sort(case_dirs.begin(), case_dirs.end());
    for (const auto& cdir : case_dirs) g.cases.push_back(read_case(cdir.string()));
    dataset.graphs.push_back(std::move(g));
  }
  return dataset;
}

EvalDataset to_eval_dataset(std::vector<SimulatedGraph> graphs) {
  EvalDataset dataset;
  for (auto& sg : graphs) {
    EvalGraph g{sg.id, sg.dag.graph(), {}};
    g.cases.reserve(sg.cases.size());
    for (auto& c : sg.cases) g.cases.push_back(std::move(c.data));
    dataset.graphs.push_back(std::move(g));
  }
  return dataset;
}

EvalReport evaluate(const EvalDataset& dataset, std::span<const ScorerConfig> scorers, const EvalOptions& options) {
  if (options.k == 0) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  struct Slot {
    std::size_t graph;
    const Case* data;
  };
  std::vector<Slot> slots;
  for (std::size_t g = 0; g < dataset.graphs.size(); ++g) {
    for (const auto& c : dataset.graphs[g].cases) {
      if (c.truth()) slots.push_back({g, &c});
    }
  }
  if (slots.empty()) throw Error(ErrorCode::EmptyCaseSet, "dataset has no labeled cases");

  EvalReport report;
  report.k = options.k;
  report.graphs = dataset.graphs.size();

  for (const auto& scorer : scorers) {
    std::vector<std::optional<Ranking>> rankings(slots.size());
    std::vector<double> seconds(slots.size(), 0.0);
    parallel_for(slots.size(), options.jobs, [&](std::size_t i) {
      const auto& slot = slots[i];
      try {
        const auto start = std::chrono::steady_clock::now();
        ScoreResult result = run_scorer(scorer, *slot.data, dataset.graphs[slot.graph].graph);
        seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rankings[i] = std::move(result.ranking);
      } catch (const std::exception&) {
        rankings[i].reset();
      }
    });

    MethodReport m;
    m.method = scorer.name;
    std::vector<std::vector<const Ranking*>> per_graph_rankings(dataset.graphs.size());
    std::vector<std::vector<const GroundTruth*>> per_graph_truths(dataset.graphs.size());
    std::vector<std::vector<double>> per_graph_seconds(dataset.graphs.size());
    std::map<std::string, std::pair<std::vector<const Ranking*>, std::vector<const GroundTruth*>>> slices;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!rankings[i]) {
        ++m.failures;
        continue;
      }
      ++m.cases;
      const std::size_t g = slots[i].graph;
      per_graph_rankings[g].push_back(&*rankings[i]);
      per_graph_truths[g].push_back(&*slots[i].data->truth());
      per_graph_seconds[g].push_back(seconds[i]);
      if (const auto& type = slots[i].data->fault_type()) {
        slices[*type].first.push_back(&*rankings[i]);
        slices[*type].second.push_back(&*slots[i].data->truth());
      }
    }

    std::vector<double> graph_avg;
    std::vector<double> graph_time;
    for (std::size_t g = 0; g < dataset.graphs.size(); ++g) {
      if (per_graph_rankings[g].empty()) continue;
      auto curve = ac_curve(per_graph_rankings[g], per_graph_truths[g], options.k);
      graph_avg.push_back(mean(curve));
      graph_time.push_back(mean(per_graph_seconds[g]));
      m.graph_ac.push_back(std::move(curve));
    }
    m.ac_mean.assign(options.k, 0.0);
    m.ac_std.assign(options.k, 0.0);
    for (std::size_t k = 0; k < options.k; ++k) {
      std::vector<double> column;
      for (const auto& curve : m.graph_ac) column.push_back(curve[k]);
      std::tie(m.ac_mean[k], m.ac_std[k]) = mean_std(column);
    }
    std::tie(m.avg_mean, m.avg_std) = mean_std(graph_avg);
    std::tie(m.time_mean, m.time_std) = mean_std(graph_time);
    for (const auto& [type, data] : slices) {
      m.by_fault_type[type] = SliceReport{data.first.size(), ac_curve(data.first, data.second, options.k)};
    }
    report.methods.push_back(std::move(m));
  }
  return report;
}

std::string report_json(const EvalReport& report, bool include_timing) {
  json doc;
  doc["k"] = report.k;
  doc["graphs"] = report.graphs;
  doc["methods"] = json::array();
  for (const auto& m : report.methods) {
    json j;
    j["method"] = m.method;
    j["cases"] = m.cases;
    j["failures"] = m.failures;
    j["ac_mean"] = m.ac_mean;
    j["ac_std"] = m.ac_std;
    j["avg_mean"] = m.avg_mean;
    j["avg_std"] = m.avg_std;
    j["graph_ac"] = m.graph_ac;
    if (m.method == "dfs") j["note"] = kDfsNote;
    if (include_timing) {
      j["time_mean_seconds"] = m.time_mean;
      j["time_std_seconds"] = m.time_std;
    }
    json slices = json::object();
    for (const auto& [type, s] : m.by_fault_type) slices[type] = {{"cases", s.cases}, {"ac", s.ac}};
    j["by_fault_type"] = std::move(slices);
    doc["methods"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

namespace {

std::string cell(double value, double spread) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << value << "(" << std::setprecision(2) << spread << ")";
  return out.str();
}

}  // namespace

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  const std::string kk = std::to_string(report.k);
  out << std::left << std::setw(10) << "method" << std::right << std::setw(14) << "AC@1" << std::setw(14)
      << ("AC@" + kk) << std::setw(14) << ("Avg@" + kk) << std::setw(16) << "T(s)" << std::setw(10) << "failed"
      << "\n";
  for (const auto& m : report.methods) {
    out << std::left << std::setw(10) << m.method << std::right << std::setw(14) << cell(m.ac_mean[0], m.ac_std[0])
        << std::setw(14) << cell(m.ac_mean[report.k - 1], m.ac_std[report.k - 1]) << std::setw(14)
        << cell(m.avg_mean, m.avg_std);
    std::ostringstream t;
    t << std::fixed << std::setprecision(6) << m.time_mean;
    out << std::setw(16) << t.str() << std::setw(10) << m.failures << "\n";
  }
  for (const auto& m : report.methods) {
    if (m.method == "dfs") out << "dfs: " << kDfsNote << "\n";
  }
  return out.str();
}

std::string fault_type_table(const EvalReport& report) {
  std::set<std::string> types;
  for (const auto& m : report.methods) {
    for (const auto& [type, s] : m.by_fault_type) types.insert(type);
  }
  if (types.empty()) return {};
  std::ostringstream out;
  out << std::left << std::setw(10) << "method" << std::right;
  const std::string kk = std::to_string(report.k);
  for (const auto& type : types) {
    std::size_t n = 0;
    for (const auto& m : report.methods) {
      if (auto it = m.by_fault_type.find(type); it != m.by_fault_type.end()) n = std::max(n, it->second.cases);
    }
    out << std::setw(24) << (type + " (n=" + std::to_string(n) + ")");
  }
  out << "\n" << std::setw(10) << "" << std::right;
  for (std::size_t i = 0; i < types.size(); ++i) out << std::setw(12) << "AC@1" << std::setw(12) << ("AC@" + kk);
  out << "\n";
  for (const auto& m : report.methods) {
    out << std::left << std::setw(10) << m.method << std::right << std::fixed << std::setprecision(3);
    for (const auto& type : types) {
      auto it = m.by_fault_type.find(type);
      if (it == m.by_fault_type.end()) {
        out << std::setw(12) << "-" << std::setw(12) << "-";
      } else {
        out << std::setw(12) << it->second.ac.front() << std::setw(12) << it->second.ac.back();
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace circa
