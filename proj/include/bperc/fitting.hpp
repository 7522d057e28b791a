#pragma once

// Threshold extraction and curve fitting.
//
// Finite-size thresholds come from a two-stage procedure: a rough
// tanh-sigmoid fit on a coarse grid picks a window around P = 1/2, then a
// linear fit of y = atanh(2P - 1) = ln(P / (1 - P)) / 2 inside the window
// gives the refined (chi_cL, Delta_L) with slope 1/Delta_L and intercept
// -chi_cL/Delta_L. With this convention Delta_L is the width of
// g(chi) = [1 + tanh((chi - chi_cL)/Delta_L)] / 2 in both stages.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bperc/analysis.hpp"

namespace bperc {

inline constexpr double kSiteThreshold = 0.59274621;
inline constexpr double kBondThreshold = 0.5;

// (1 + (1-q) x)^(1/(1-q)); exp(x) at q = 1. Throws outside the support.
double q_exponential(double x, double q);

double sigmoid(double chi, double chi_cL, double width);

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

// chi_pm = chi_c + (width/2) ln((1 +- 2 eps)/(1 -+ 2 eps)); g(chi_pm) = 1/2 +- eps.
Window restricted_window(double chi_cL, double width, double epsilon);

struct SigmoidFit {
  double chi_cL_star = 0.0;
  double delta_star = 0.0;
  double epsilon = 0.0;
  Window window;
  double residual_norm = 0.0;
  int iterations = 0;
};

// Throws ErrorCode::threshold_not_reached when max P < 1/2.
SigmoidFit fit_sigmoid_rough(const PercolationCurve& curve, double epsilon = 0.1);

struct LogitFit {
  double chi_cL = 0.0;
  double delta = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;
  std::size_t points = 0;
};

// Points with P outside (0, 1) are dropped; fewer than 3 remaining throws
// ErrorCode::insufficient_data.
LogitFit fit_logit(const PercolationCurve& window_curve);

struct ThresholdOptions {
  double epsilon = 0.1;
  double rough_lo = 0.1;
  double rough_hi = 1.0;
  std::size_t rough_points = 91;
  std::size_t window_points = 201;
};

struct ThresholdEstimate {
  SigmoidFit rough;
  LogitFit refined;
  PercolationCurve rough_curve;
  PercolationCurve window_curve;
};

ThresholdEstimate estimate_threshold(const CumulativeSpanning& cumulative, int side,
                                     const ThresholdOptions& options = {});

struct ScalingPoint {
  double size = 0.0;
  double value = 0.0;
};

struct WidthScalingFit {
  double nu = 0.0;
  double nu_se = 0.0;
  double slope = 0.0;
  double amplitude = 0.0;
  bool low_confidence = false;
};

// Regression of ln Delta_L on ln L; nu = -1/slope.
WidthScalingFit fit_width_scaling(std::span<const ScalingPoint> widths);

struct ThresholdScalingOptions {
  double alpha_min = -2.5;
  double alpha_max = -1.0;
  double alpha_step = 0.005;
  double min_r_squared = 0.9;
};

struct FssFit {
  double alpha = 0.0;
  double chi_c_inf = 0.0;
  double chi_c_se = 0.0;
  double amplitude = 0.0;  // slope of chi_cL against L^alpha
  double r_squared = 0.0;
  bool poor_scaling = false;
  std::optional<WidthScalingFit> width;
};

// Grid search over alpha maximizing R^2 of chi_cL against L^alpha; the
// intercept is the thermodynamic-limit threshold. Needs at least 4 sizes.
FssFit fit_threshold_scaling(std::span<const ScalingPoint> thresholds,
                             const ThresholdScalingOptions& options = {});

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double error = 0.0;  // 0 = unknown
};

enum class FitWeighting { unweighted, inverse_variance };

struct QExpFit {
  double lambda = 0.0;
  double q = 0.0;
  double lambda_se = 0.0;
  double q_se = 0.0;
  double p_cs = kSiteThreshold;
  double residual_norm = 0.0;
  int iterations = 0;

  double critical_susceptibility(double p_d) const;
};

// chi_c(p_d) = p_cs / e_q(-lambda p_d).
double critical_susceptibility(double p_d, double lambda, double q, double p_cs = kSiteThreshold);

QExpFit fit_qexp_curve(std::span<const CurvePoint> points, FitWeighting weighting = FitWeighting::unweighted,
                       double p_cs = kSiteThreshold);

struct PowerLawFit {
  double sigma = 0.0;
  double tau = 0.0;
  double sigma_se = 0.0;
  double tau_se = 0.0;
  double residual_norm = 0.0;

  double evaluate(double p_d) const;
};

enum class PowerLawMethod {
  nonlinear,  // least squares on q_b itself, seeded by the log-log fit
  log_log,    // linear regression of ln q_b on ln p_d
};

PowerLawFit fit_power_law(std::span<const CurvePoint> points, PowerLawMethod method = PowerLawMethod::nonlinear,
                          FitWeighting weighting = FitWeighting::unweighted);

}  // namespace bperc
