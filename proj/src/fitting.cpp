#include "bperc/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bperc/errors.hpp"
#include "bperc/least_squares.hpp"

namespace bperc {

double q_exponential(double x, double q) {
  if (std::abs(1.0 - q) < 1e-12) return std::exp(x);
  const double base = 1.0 + (1.0 - q) * x;
  if (!(base > 0.0)) {
    std::ostringstream msg;
    msg << "q-exponential argument " << x << " outside support for q = " << q;
    fail(ErrorCode::domain, msg.str());
  }
  return std::exp(std::log1p((1.0 - q) * x) / (1.0 - q));
}

double sigmoid(double chi, double chi_cL, double width) {
  return 0.5 * (1.0 + std::tanh((chi - chi_cL) / width));
}

Window restricted_window(double chi_cL, double width, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) fail(ErrorCode::domain, "epsilon must lie in (0, 1/2)");
  const double half = 0.5 * width * std::log((1.0 + 2.0 * epsilon) / (1.0 - 2.0 * epsilon));
  return Window{chi_cL - half, chi_cL + half};
}

namespace {

// Linear interpolation of the first crossing of `target`, or nullopt.
std::optional<double> first_crossing(const PercolationCurve& curve, double target) {
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (curve.P[k] < target) continue;
    if (k == 0) return curve.chi[0];
    const double p0 = curve.P[k - 1], p1 = curve.P[k];
    const double t = p1 > p0 ? (target - p0) / (p1 - p0) : 0.0;
    return curve.chi[k - 1] + t * (curve.chi[k] - curve.chi[k - 1]);
  }
  return std::nullopt;
}

bool have_errors(std::span<const CurvePoint> points) {
  return std::all_of(points.begin(), points.end(), [](const CurvePoint& p) { return p.error > 0.0; });
}

Eigen::MatrixXd fit_covariance(const LevenbergMarquardtResult& lm, std::span<const CurvePoint> points,
                               FitWeighting weighting) {
  if (!have_errors(points)) return residual_covariance(lm.jacobian, lm.residual_norm);
  if (weighting == FitWeighting::inverse_variance)
    return (lm.jacobian.transpose() * lm.jacobian).inverse();
  Eigen::VectorXd var(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) var[static_cast<Eigen::Index>(i)] = points[i].error * points[i].error;
  return sandwich_covariance(lm.jacobian, var);
}

double point_weight(const CurvePoint& p, FitWeighting weighting) {
  return (weighting == FitWeighting::inverse_variance && p.error > 0.0) ? 1.0 / p.error : 1.0;
}

}  // namespace

SigmoidFit fit_sigmoid_rough(const PercolationCurve& curve, double epsilon) {
  if (curve.size() < 3) fail(ErrorCode::insufficient_data, "sigmoid fit needs at least 3 points");
  const double max_p = *std::max_element(curve.P.begin(), curve.P.end());
  const double min_p = *std::min_element(curve.P.begin(), curve.P.end());
  if (max_p < 0.5) {
    std::ostringstream msg;
    msg << "percolation probability saturates at " << max_p << " < 1/2";
    fail(ErrorCode::threshold_not_reached, msg.str());
  }
  if (min_p > 0.5) fail(ErrorCode::domain, "curve starts above 1/2; threshold lies below the grid");

  const double c0 = *first_crossing(curve, 0.5);
  double width0 = 0.05;
  const auto q25 = first_crossing(curve, 0.25);
  const auto q75 = first_crossing(curve, 0.75);
  if (q25 && q75 && *q75 > *q25) width0 = (*q75 - *q25) / (2.0 * std::atanh(0.5));
  else if (q25 && c0 > *q25) width0 = (c0 - *q25) / std::atanh(0.5);

  const auto m = curve.size();
  auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    if (!(p[1] > 0.0)) return false;
    for (std::size_t i = 0; i < m; ++i)
      r[static_cast<Eigen::Index>(i)] = sigmoid(curve.chi[i], p[0], p[1]) - curve.P[i];
    return true;
  };
  LevenbergMarquardtOptions opts;
  opts.step_tolerance = 1e-12;
  const auto lm = levenberg_marquardt(residuals, Eigen::Vector2d(c0, width0), m, opts);

  SigmoidFit fit;
  fit.chi_cL_star = lm.params[0];
  fit.delta_star = lm.params[1];
  fit.epsilon = epsilon;
  fit.window = restricted_window(fit.chi_cL_star, fit.delta_star, epsilon);
  fit.residual_norm = lm.residual_norm;
  fit.iterations = lm.iterations;
  return fit;
}

LogitFit fit_logit(const PercolationCurve& window_curve) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < window_curve.size(); ++i) {
    const double p = window_curve.P[i];
    if (!(p > 0.0 && p < 1.0)) continue;
    x.push_back(window_curve.chi[i]);
    y.push_back(0.5 * std::log(p / (1.0 - p)));
  }
  if (x.size() < 3)
    fail(ErrorCode::insufficient_data,
         "logit fit needs 3 points strictly inside (0, 1), have " + std::to_string(x.size()));
  const LinearFit lin = linear_regression(x, y);
  if (!(lin.slope > 0.0)) fail(ErrorCode::fit_failure, "logit slope is not positive");

  LogitFit fit;
  fit.slope = lin.slope;
  fit.intercept = lin.intercept;
  fit.delta = 1.0 / lin.slope;
  fit.chi_cL = -lin.intercept / lin.slope;
  fit.residual_norm = lin.residual_norm;
  fit.points = x.size();
  return fit;
}

ThresholdEstimate estimate_threshold(const CumulativeSpanning& cumulative, int side,
                                     const ThresholdOptions& options) {
  ThresholdEstimate est;
  const auto rough_grid = uniform_grid(options.rough_lo, options.rough_hi, options.rough_points);
  est.rough_curve = percolation_probability(cumulative, rough_grid, side);
  est.rough = fit_sigmoid_rough(est.rough_curve, options.epsilon);

  const double lo = std::clamp(est.rough.window.lo, 0.0, 1.0);
  const double hi = std::clamp(est.rough.window.hi, 0.0, 1.0);
  if (!(hi > lo)) fail(ErrorCode::fit_failure, "restricted window is empty");
  est.window_curve = percolation_probability(cumulative, uniform_grid(lo, hi, options.window_points), side);
  est.refined = fit_logit(est.window_curve);
  return est;
}

WidthScalingFit fit_width_scaling(std::span<const ScalingPoint> widths) {
  if (widths.size() < 2) fail(ErrorCode::insufficient_data, "width scaling needs at least two sizes");
  std::vector<double> x, y;
  for (const auto& w : widths) {
    if (!(w.value > 0.0) || !(w.size > 0.0)) fail(ErrorCode::domain, "widths and sizes must be positive");
    x.push_back(std::log(w.size));
    y.push_back(std::log(w.value));
  }
  const LinearFit lin = linear_regression(x, y);
  if (!(lin.slope < 0.0)) fail(ErrorCode::fit_failure, "transition width does not shrink with size");

  WidthScalingFit fit;
  fit.slope = lin.slope;
  fit.amplitude = std::exp(lin.intercept);
  fit.nu = -1.0 / lin.slope;
  fit.nu_se = lin.slope_se / (lin.slope * lin.slope);
  fit.low_confidence = widths.size() < 3;
  return fit;
}

FssFit fit_threshold_scaling(std::span<const ScalingPoint> thresholds, const ThresholdScalingOptions& options) {
  if (thresholds.size() < 4)
    fail(ErrorCode::insufficient_data, "threshold extrapolation needs at least four sizes");
  if (!(options.alpha_step > 0.0) || options.alpha_max < options.alpha_min)
    fail(ErrorCode::domain, "bad alpha grid");

  std::vector<double> x(thresholds.size()), y(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) y[i] = thresholds[i].value;

  FssFit best;
  best.r_squared = -std::numeric_limits<double>::infinity();
  const auto steps = static_cast<long>(std::llround((options.alpha_max - options.alpha_min) / options.alpha_step));
  for (long k = 0; k <= steps; ++k) {
    const double alpha = options.alpha_min + static_cast<double>(k) * options.alpha_step;
    for (std::size_t i = 0; i < thresholds.size(); ++i) x[i] = std::pow(thresholds[i].size, alpha);
    const LinearFit lin = linear_regression(x, y);
    if (lin.r_squared > best.r_squared) {
      best.r_squared = lin.r_squared;
      best.alpha = alpha;
      best.chi_c_inf = lin.intercept;
      best.chi_c_se = lin.intercept_se;
      best.amplitude = lin.slope;
    }
  }
  best.poor_scaling = best.r_squared < options.min_r_squared;
  return best;
}

double critical_susceptibility(double p_d, double lambda, double q, double p_cs) {
  return p_cs / q_exponential(-lambda * p_d, q);
}

double QExpFit::critical_susceptibility(double p_d) const {
  return bperc::critical_susceptibility(p_d, lambda, q, p_cs);
}

QExpFit fit_qexp_curve(std::span<const CurvePoint> points, FitWeighting weighting, double p_cs) {
  if (points.size() < 4) fail(ErrorCode::insufficient_data, "q-exponential fit needs at least four points");

  // lambda0 from chi_c ~ p_cs (1 + lambda p_d) on the smallest positive p_d.
  std::vector<CurvePoint> small;
  for (const auto& p : points)
    if (p.x > 0.0) small.push_back(p);
  if (small.empty()) fail(ErrorCode::insufficient_data, "q-exponential fit needs points with p_d > 0");
  std::sort(small.begin(), small.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  small.resize(std::min<std::size_t>(small.size(), 3));
  double num = 0, den = 0;
  for (const auto& p : small) {
    num += p.x * (p.y / p_cs - 1.0);
    den += p.x * p.x;
  }
  double lambda0 = num / den;
  if (!(lambda0 > 0.0)) lambda0 = 0.1;

  double x_max = 0;
  for (const auto& p : points) x_max = std::max(x_max, p.x);

  const auto m = points.size();
  auto residuals = [&](const Eigen::VectorXd& par, Eigen::VectorXd& r) {
    const double lambda = par[0], q = par[1];
    if (!(1.0 - (1.0 - q) * lambda * x_max > 0.0)) return false;
    for (std::size_t i = 0; i < m; ++i) {
      const double model = p_cs / q_exponential(-lambda * points[i].x, q);
      r[static_cast<Eigen::Index>(i)] = (model - points[i].y) * point_weight(points[i], weighting);
    }
    return true;
  };

  LevenbergMarquardtResult lm;
  try {
    lm = levenberg_marquardt(residuals, Eigen::Vector2d(lambda0, 0.0), m);
  } catch (const Error& e) {
    fail(ErrorCode::fit_failure, std::string("q-exponential fit failed: ") + e.what());
  }

  QExpFit fit;
  fit.lambda = lm.params[0];
  fit.q = lm.params[1];
  fit.p_cs = p_cs;
  fit.residual_norm = lm.residual_norm;
  fit.iterations = lm.iterations;
  const Eigen::MatrixXd cov = fit_covariance(lm, points, weighting);
  fit.lambda_se = std::sqrt(std::max(0.0, cov(0, 0)));
  fit.q_se = std::sqrt(std::max(0.0, cov(1, 1)));
  if (!(fit.lambda * (1.0 - fit.q) * x_max < 1.0))
    fail(ErrorCode::fit_failure, "fitted q-exponential violates its support on the data range");
  return fit;
}

double PowerLawFit::evaluate(double p_d) const { return sigma * std::pow(p_d, tau); }

PowerLawFit fit_power_law(std::span<const CurvePoint> points, PowerLawMethod method, FitWeighting weighting) {
  std::vector<CurvePoint> usable;
  for (const auto& p : points)
    if (p.x > 0.0 && p.y > 0.0) usable.push_back(p);
  if (usable.size() < 3)
    fail(ErrorCode::insufficient_data, "power-law fit needs three points with positive p_d and q_b");

  std::vector<double> lx, ly;
  for (const auto& p : usable) {
    lx.push_back(std::log(p.x));
    ly.push_back(std::log(p.y));
  }
  const LinearFit lin = linear_regression(lx, ly);

  PowerLawFit fit;
  fit.sigma = std::exp(lin.intercept);
  fit.tau = lin.slope;
  if (method == PowerLawMethod::log_log) {
    fit.sigma_se = fit.sigma * lin.intercept_se;
    fit.tau_se = lin.slope_se;
    fit.residual_norm = lin.residual_norm;
    return fit;
  }

  const auto m = usable.size();
  auto residuals = [&](const Eigen::VectorXd& par, Eigen::VectorXd& r) {
    if (!(par[0] > 0.0)) return false;
    for (std::size_t i = 0; i < m; ++i)
      r[static_cast<Eigen::Index>(i)] =
          (par[0] * std::pow(usable[i].x, par[1]) - usable[i].y) * point_weight(usable[i], weighting);
    return true;
  };
  LevenbergMarquardtResult lm;
  try {
    lm = levenberg_marquardt(residuals, Eigen::Vector2d(fit.sigma, fit.tau), m);
  } catch (const Error& e) {
    fail(ErrorCode::fit_failure, std::string("power-law fit failed: ") + e.what());
  }
  fit.sigma = lm.params[0];
  fit.tau = lm.params[1];
  fit.residual_norm = lm.residual_norm;
  const Eigen::MatrixXd cov = fit_covariance(lm, usable, weighting);
  fit.sigma_se = std::sqrt(std::max(0.0, cov(0, 0)));
  fit.tau_se = std::sqrt(std::max(0.0, cov(1, 1)));
  return fit;
}

}  // namespace bperc
