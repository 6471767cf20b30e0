#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "circa/model.hpp"

namespace circa {

// Linear predictor plus the residual distribution N(mean, std) observed on
// its training rows.
struct LinearModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double residual_mean = 0.0;
  double residual_std = 1.0;  // always >= sigma_floor of the training target

  std::size_t feature_count() const noexcept { return static_cast<std::size_t>(coefficients.size()); }
  // Throws DimensionMismatch if row.size() != feature_count().
  double predict(std::span<const double> row) const;
};

// A model fitted for one metric from the values of `features`.
struct FittedModel {
  MetricId target;
  std::vector<MetricId> features;
  LinearModel model;
};

// Lower bound on residual and reference standard deviations, so that
// perfectly predicted or constant metrics do not divide by zero.
inline double sigma_floor(double target_std) { return 1e-6 * (target_std > 1.0 ? target_std : 1.0); }

// Ordinary least squares with intercept. Each row of `features` is one
// observation. Rank-deficient designs get the minimum-norm solution.
// Residual statistics use the population standard deviation.
// Throws InsufficientData for fewer than two rows, DimensionMismatch when
// row counts differ, InvalidArgument on non-finite input.
LinearModel fit_ols(std::span<const double> target, const Eigen::MatrixXd& features);

// Pluggable regression backend. Only "linear" is provided.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual std::string_view name() const = 0;
  virtual LinearModel fit(std::span<const double> target, const Eigen::MatrixXd& features) const = 0;
};

class LinearRegressor final : public Regressor {
 public:
  std::string_view name() const override { return "linear"; }
  LinearModel fit(std::span<const double> target, const Eigen::MatrixXd& features) const override {
    return fit_ols(target, features);
  }
};

// Throws UnknownRegressor for names other than "linear".
std::unique_ptr<Regressor> make_regressor(std::string_view name);

}  // namespace circa
