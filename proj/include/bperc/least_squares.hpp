#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace bperc {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double r_squared = 0.0;
  double residual_norm = 0.0;
  std::size_t points = 0;
};

// Ordinary (or weighted, when weights are given) least squares y = a x + b.
LinearFit linear_regression(std::span<const double> x, std::span<const double> y,
                            std::span<const double> weights = {});

// Fills residuals for the given parameters; returns false when the
// parameters are outside the model's domain.
using ResidualFunction = std::function<bool(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LevenbergMarquardtOptions {
  double step_tolerance = 1e-8;  // relative parameter change
  int max_iterations = 500;
  double initial_damping = 1e-3;
  double derivative_step = 1e-7;
};

struct LevenbergMarquardtResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd jacobian;  // at the solution
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped Gauss-Newton with a central-difference Jacobian.
LevenbergMarquardtResult levenberg_marquardt(const ResidualFunction& residuals, Eigen::VectorXd start,
                                             std::size_t residual_count,
                                             const LevenbergMarquardtOptions& options = {});

// s^2 (J^T J)^-1 with s^2 = |r|^2 / (m - p).
Eigen::MatrixXd residual_covariance(const Eigen::MatrixXd& jacobian, double residual_norm);

// (J^T J)^-1 J^T diag(var) J (J^T J)^-1: propagates known point variances
// through an unweighted fit.
Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& variances);

}  // namespace bperc
