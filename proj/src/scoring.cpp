#include "circa/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "circa/errors.hpp"

namespace circa {

namespace {

void require_series(const Case& c, const CausalGraph& graph) {
  std::string missing;
  for (const auto& node : graph.nodes()) {
    if (c.contains(node)) continue;
    if (!missing.empty()) missing += ", ";
    missing += node.str();
  }
  if (!missing.empty()) throw Error(ErrorCode::MissingSeries, missing);
}

}  // namespace

ScoreMap rht_score(const Case& c, const CausalGraph& graph, bool use_lagged_self, const Regressor& regressor) {
  require_series(c, graph);
  const CaseSplit split = split_indices(c);
  const std::size_t lag = use_lagged_self ? 1 : 0;
  if (split.reference.size() <= lag) throw Error(ErrorCode::InsufficientData, "reference range too short");
  const std::size_t train_begin = split.reference.begin + lag;
  const auto train_rows = static_cast<Eigen::Index>(split.reference.end - train_begin);

  ScoreMap scores;
  for (const auto& node : graph.nodes()) {
    const auto& target = c.at(node).values;
    std::vector<const std::vector<double>*> columns;
    for (const auto& p : graph.parents(node)) columns.push_back(&c.at(p).values);
    const auto n_features = static_cast<Eigen::Index>(columns.size() + lag);

    Eigen::MatrixXd x(train_rows, n_features);
    for (Eigen::Index r = 0; r < train_rows; ++r) {
      const std::size_t t = train_begin + static_cast<std::size_t>(r);
      for (std::size_t j = 0; j < columns.size(); ++j) x(r, static_cast<Eigen::Index>(j)) = (*columns[j])[t];
      if (lag) x(r, n_features - 1) = target[t - 1];
    }
    const LinearModel model =
        regressor.fit(std::span<const double>(target.data() + train_begin, static_cast<std::size_t>(train_rows)), x);

    double score = 0.0;
    std::vector<double> row(static_cast<std::size_t>(n_features));
    for (std::size_t t = split.test.begin; t < split.test.end; ++t) {
      for (std::size_t j = 0; j < columns.size(); ++j) row[j] = (*columns[j])[t];
      if (lag) row.back() = target[t - 1];
      const double residual = target[t] - model.predict(row);
      score = std::max(score, std::abs((residual - model.residual_mean) / model.residual_std));
    }
    scores.emplace(node, score);
  }
  return scores;
}

ScoreMap nsigma_score(const Case& c) {
  const CaseSplit split = split_indices(c);
  if (split.reference.empty()) throw Error(ErrorCode::InsufficientData, "empty reference range");
  ScoreMap scores;
  for (const auto& [id, ts] : c.series()) {
    const std::span<const double> ref(ts.values.data() + split.reference.begin, split.reference.size());
    const double mu = mean(ref);
    const double sd = population_std(ref);
    const double sigma = std::max(sd, sigma_floor(sd));
    double score = 0.0;
    for (std::size_t t = split.test.begin; t < split.test.end; ++t) {
      score = std::max(score, std::abs(ts.values[t] - mu) / sigma);
    }
    scores.emplace(id, score);
  }
  return scores;
}

ScoreMap descendant_adjust(const ScoreMap& scores, const CausalGraph& graph, double threshold) {
  for (const auto& node : graph.nodes()) {
    if (!scores.contains(node)) throw Error(ErrorCode::InvalidArgument, "no score for " + node.str());
  }
  // Largest score collected from the children, where a sub-threshold child
  // also passes on what it collected itself. Scores are non-negative, so an
  // empty collection contributes 0.
  std::map<MetricId, double> collected;
  const auto& order = graph.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    double best = 0.0;
    for (const auto& child : graph.children(*it)) {
      const double s = scores.at(child);
      best = std::max(best, s);
      if (s < threshold) best = std::max(best, collected.at(child));
    }
    collected.emplace(*it, best);
  }
  ScoreMap adjusted = scores;
  for (auto& [id, s] : adjusted) {
    if (s >= threshold) {
      if (auto it = collected.find(id); it != collected.end()) s += it->second;
    }
  }
  return adjusted;
}

Ranking dfs_score(const Case& c, const CausalGraph& graph, const ScoreMap& detector_scores, double threshold) {
  if (!graph.contains(c.sli())) throw Error(ErrorCode::MissingSeries, "SLI " + c.sli().str() + " is not in the graph");
  for (const auto& node : graph.nodes()) {
    if (!detector_scores.contains(node)) throw Error(ErrorCode::MissingSeries, node.str());
  }
  auto abnormal = [&](const MetricId& m) { return detector_scores.at(m) >= threshold; };

  std::set<MetricId> visited{c.sli()};
  std::vector<MetricId> stack{c.sli()};
  while (!stack.empty()) {
    const MetricId node = stack.back();
    stack.pop_back();
    for (const auto& parent : graph.parents(node)) {
      if (abnormal(parent) && visited.insert(parent).second) stack.push_back(parent);
    }
  }

  std::set<MetricId> candidates;
  for (const auto& node : visited) {
    if (!abnormal(node)) continue;
    const auto& parents = graph.parents(node);
    if (std::none_of(parents.begin(), parents.end(), abnormal)) candidates.insert(node);
  }

  double lift = 0.0;
  for (const auto& [id, s] : detector_scores) lift = std::max(lift, s);
  lift += 1.0;
  ScoreMap priority = detector_scores;
  for (const auto& m : candidates) priority[m] += lift;
  return rank(priority);
}

Ranking rank(const ScoreMap& scores) {
  std::vector<RankedMetric> entries;
  entries.reserve(scores.size());
  for (const auto& [id, s] : scores) {
    if (std::isnan(s)) throw Error(ErrorCode::InvalidArgument, "NaN score for " + id.str());
    entries.push_back({id, s});
  }
  // std::map iteration is already ascending by id, so a stable sort on score
  // leaves ties in MetricId order.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const RankedMetric& a, const RankedMetric& b) { return a.score > b.score; });
  return Ranking(std::move(entries));
}

const std::vector<std::string>& scorer_names() {
  static const std::vector<std::string> names{"rht", "rht-pg", "circa", "nsigma", "dfs", "ideal"};
  return names;
}

ScorerConfig scorer_config(std::string_view name) {
  ScorerConfig config;
  config.name = std::string(name);
  if (name == "rht") {
    config.method = Method::Rht;
  } else if (name == "rht-pg") {
    config.method = Method::RhtPg;
    config.use_lagged_self = true;
  } else if (name == "circa") {
    config.method = Method::Circa;
    config.adjust = true;
  } else if (name == "nsigma") {
    config.method = Method::NSigma;
  } else if (name == "dfs") {
    config.method = Method::Dfs;
  } else if (name == "ideal") {
    config.method = Method::Ideal;
  } else {
    throw Error(ErrorCode::UnknownScorer, std::string(name));
  }
  return config;
}

ScoreResult run_scorer(const ScorerConfig& config, const Case& c, const CausalGraph& graph) {
  ScoreResult result;
  switch (config.method) {
    case Method::Rht:
    case Method::RhtPg:
    case Method::Circa: {
      const auto regressor = make_regressor(config.regressor);
      result.table.raw = rht_score(c, graph, config.use_lagged_self, *regressor);
      break;
    }
    case Method::NSigma:
      result.table.raw = nsigma_score(c);
      break;
    case Method::Dfs:
      result.table.raw = nsigma_score(c);
      result.ranking = dfs_score(c, graph, result.table.raw, config.threshold);
      return result;
    case Method::Ideal: {
      if (!c.truth()) throw Error(ErrorCode::InvalidArgument, "ideal scorer needs ground truth");
      for (const auto& m : c.metrics()) result.table.raw[m] = c.truth()->root_causes.contains(m) ? 1.0 : 0.0;
      break;
    }
  }
  if (config.adjust) {
    result.table.adjusted = descendant_adjust(result.table.raw, graph, config.threshold);
    result.ranking = rank(*result.table.adjusted);
  } else {
    result.ranking = rank(result.table.raw);
  }
  return result;
}

}  // namespace circa
