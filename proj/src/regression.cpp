#include "circa/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "circa/errors.hpp"

namespace circa {

double LinearModel::predict(std::span<const double> row) const {
  if (row.size() != feature_count()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(feature_count()) + " features, got " +
                                                  std::to_string(row.size()));
  }
  double value = intercept;
  for (std::size_t i = 0; i < row.size(); ++i) value += coefficients[static_cast<Eigen::Index>(i)] * row[i];
  return value;
}

LinearModel fit_ols(std::span<const double> target, const Eigen::MatrixXd& features) {
  const auto rows = static_cast<Eigen::Index>(target.size());
  if (rows < 2) throw Error(ErrorCode::InsufficientData, "need at least two rows, got " + std::to_string(rows));
  if (features.rows() != rows) {
    throw Error(ErrorCode::DimensionMismatch, "target has " + std::to_string(rows) + " rows, features have " +
                                                  std::to_string(features.rows()));
  }
  const Eigen::Map<const Eigen::VectorXd> y(target.data(), rows);
  if (!y.allFinite() || !features.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite regression input");

  LinearModel model;
  const double y_mean = y.mean();
  if (features.cols() == 0) {
    model.coefficients = Eigen::VectorXd();
    model.intercept = y_mean;
  } else {
    // Centering removes the intercept from the solve, so the minimum-norm
    // solution never trades the intercept against the slopes.
    const Eigen::RowVectorXd x_mean = features.colwise().mean();
    const Eigen::MatrixXd xc = features.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;
    model.coefficients = xc.completeOrthogonalDecomposition().solve(yc);
    model.intercept = y_mean - x_mean.dot(model.coefficients);
  }

  Eigen::VectorXd residuals = y.array() - model.intercept;
  if (features.cols() > 0) residuals -= features * model.coefficients;
  model.residual_mean = residuals.mean();
  const double residual_std = std::sqrt((residuals.array() - model.residual_mean).square().mean());
  const double target_std = std::sqrt((y.array() - y_mean).square().mean());
  model.residual_std = std::max(residual_std, sigma_floor(target_std));
  return model;
}

std::unique_ptr<Regressor> make_regressor(std::string_view name) {
  if (name == "linear") return std::make_unique<LinearRegressor>();
  throw Error(ErrorCode::UnknownRegressor, std::string(name));
}

}  // namespace circa
