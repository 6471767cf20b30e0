#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "circa/graph.hpp"
#include "circa/model.hpp"
#include "circa/regression.hpp"

namespace circa {

// Three-sigma rule of thumb: scores below this are not root-cause indicators.
inline constexpr double kAbnormalThreshold = 3.0;

using ScoreMap = std::map<MetricId, double>;

struct ScoreTable {
  ScoreMap raw;
  std::optional<ScoreMap> adjusted;
};

// Regression-based hypothesis testing. For every graph node a regression on
// its parents (plus its own previous value when `use_lagged_self`) is fitted
// on the reference range; the score is the largest standardized residual
// |(v - v_hat - mu_eps) / sigma_eps| over the test range.
//
// Throws MissingSeries naming every graph node the case lacks.
ScoreMap rht_score(const Case& c, const CausalGraph& graph, bool use_lagged_self,
                   const Regressor& regressor = LinearRegressor{});

// max_t |v - mu| / sigma per case metric, with mu and sigma (population,
// floored) taken from the reference range.
ScoreMap nsigma_score(const Case& c);

// Adds to every score >= threshold the largest score among the metric's
// children and among the descendants reachable only through children whose
// scores are below the threshold. Scores below the threshold are unchanged.
// Metrics not in the graph pass through unchanged. Throws InvalidArgument if
// a graph node has no score.
ScoreMap descendant_adjust(const ScoreMap& scores, const CausalGraph& graph,
                           double threshold = kAbnormalThreshold);

// DFS baseline: walk from the SLI against edge direction through abnormal
// metrics (detector score >= threshold). Visited abnormal metrics without an
// abnormal parent are the root candidates; they come first, by detector
// score, followed by every other scored metric by detector score. The
// ranking's scores are the detector scores with candidates lifted above the
// largest detector score, so the ranking stays in descending order.
Ranking dfs_score(const Case& c, const CausalGraph& graph, const ScoreMap& detector_scores,
                  double threshold = kAbnormalThreshold);

// Descending by score, ties by MetricId. Throws InvalidArgument on NaN.
Ranking rank(const ScoreMap& scores);

enum class Method { Rht, RhtPg, Circa, NSigma, Dfs, Ideal };

struct ScorerConfig {
  std::string name;
  Method method = Method::Rht;
  bool use_lagged_self = false;
  bool adjust = false;
  double threshold = kAbnormalThreshold;
  std::string regressor = "linear";
};

// Registered names: rht, rht-pg, circa, nsigma, dfs, ideal.
const std::vector<std::string>& scorer_names();
// Throws UnknownScorer.
ScorerConfig scorer_config(std::string_view name);

struct ScoreResult {
  ScoreTable table;
  Ranking ranking;
};

// Scores one case. `graph` is ignored by nsigma and ideal. The ideal scorer
// reads the case's ground truth and throws InvalidArgument without it.
ScoreResult run_scorer(const ScorerConfig& config, const Case& c, const CausalGraph& graph);

}  // namespace circa
