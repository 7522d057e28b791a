#include "bperc/least_squares.hpp"

#include <algorithm>
#include <cmath>

#include "bperc/errors.hpp"

namespace bperc {

LinearFit linear_regression(std::span<const double> x, std::span<const double> y,
                            std::span<const double> weights) {
  const std::size_t n = x.size();
  if (y.size() != n || (!weights.empty() && weights.size() != n))
    fail(ErrorCode::domain, "regression inputs differ in length");
  if (n < 2) fail(ErrorCode::insufficient_data, "linear regression needs at least two points");

  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += w(i) * dx * dx;
    sxy += w(i) * dx * dy;
    syy += w(i) * dy * dy;
  }
  if (!(sxx > 0)) fail(ErrorCode::insufficient_data, "regression abscissae are all equal");

  LinearFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ssr += w(i) * r * r;
  }
  fit.residual_norm = std::sqrt(ssr);
  fit.r_squared = syy > 0 ? 1.0 - ssr / syy : 1.0;
  if (n > 2) {
    const double s2 = ssr / static_cast<double>(n - 2);
    fit.slope_se = std::sqrt(s2 / sxx);
    fit.intercept_se = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
  }
  return fit;
}

namespace {

bool jacobian_at(const ResidualFunction& f, const Eigen::VectorXd& x, const Eigen::VectorXd& r0,
                 double step, Eigen::MatrixXd& jac) {
  const auto m = r0.size();
  jac.resize(m, x.size());
  Eigen::VectorXd xp = x, xm = x, rp(m), rm(m);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = step * std::max(1.0, std::abs(x[k]));
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    const bool okp = f(xp, rp);
    const bool okm = f(xm, rm);
    if (okp && okm) {
      jac.col(k) = (rp - rm) / (2 * h);
    } else if (okp) {
      jac.col(k) = (rp - r0) / h;
    } else if (okm) {
      jac.col(k) = (r0 - rm) / h;
    } else {
      return false;
    }
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return true;
}

}  // namespace

LevenbergMarquardtResult levenberg_marquardt(const ResidualFunction& residuals, Eigen::VectorXd start,
                                             std::size_t residual_count,
                                             const LevenbergMarquardtOptions& options) {
  const auto m = static_cast<Eigen::Index>(residual_count);
  Eigen::VectorXd x = std::move(start);
  Eigen::VectorXd r(m), r_trial(m);
  if (!residuals(x, r)) fail(ErrorCode::fit_failure, "starting point is outside the model domain");
  double cost = r.squaredNorm();
  double damping = options.initial_damping;

  LevenbergMarquardtResult result;
  Eigen::MatrixXd jac;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    if (!jacobian_at(residuals, x, r, options.derivative_step, jac))
      fail(ErrorCode::fit_failure, "Jacobian undefined at current parameters");
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-300 || cost == 0.0) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    while (damping < 1e16) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index k = 0; k < a.rows(); ++k) a(k, k) += damping * std::max(jtj(k, k), 1e-12);
      const Eigen::VectorXd step = a.ldlt().solve(-grad);
      const Eigen::VectorXd trial = x + step;
      if (step.allFinite() && residuals(trial, r_trial) && r_trial.allFinite()) {
        const double trial_cost = r_trial.squaredNorm();
        if (trial_cost <= cost) {
          const double rel = step.norm() / (x.norm() + options.step_tolerance);
          x = trial;
          r = r_trial;
          cost = trial_cost;
          damping = std::max(damping / 10.0, 1e-12);
          accepted = true;
          if (rel < options.step_tolerance) result.converged = true;
          break;
        }
      }
      damping *= 10.0;
    }
    // No downhill step at any damping: we are at a minimum to machine precision.
    if (!accepted) result.converged = true;
    if (result.converged) break;
  }

  if (!jacobian_at(residuals, x, r, options.derivative_step, jac))
    fail(ErrorCode::fit_failure, "Jacobian undefined at solution");
  result.params = x;
  result.jacobian = jac;
  result.residual_norm = std::sqrt(cost);
  if (!result.converged)
    fail(ErrorCode::fit_failure, "Levenberg-Marquardt did not converge in " +
                                     std::to_string(options.max_iterations) + " iterations");
  return result;
}

Eigen::MatrixXd residual_covariance(const Eigen::MatrixXd& jacobian, double residual_norm) {
  const auto m = jacobian.rows(), p = jacobian.cols();
  const Eigen::MatrixXd inv = (jacobian.transpose() * jacobian).inverse();
  if (m <= p) return Eigen::MatrixXd::Zero(p, p);
  return inv * (residual_norm * residual_norm / static_cast<double>(m - p));
}

Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& variances) {
  const Eigen::MatrixXd inv = (jacobian.transpose() * jacobian).inverse();
  const Eigen::MatrixXd meat = jacobian.transpose() * variances.asDiagonal() * jacobian;
  return inv * meat * inv;
}

}  // namespace bperc
