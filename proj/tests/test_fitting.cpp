#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "bperc/errors.hpp"
#include "bperc/fitting.hpp"
#include "bperc/least_squares.hpp"

using namespace bperc;

namespace {

PercolationCurve exact_g(double lo, double hi, std::size_t points, double chi_c, double width) {
  PercolationCurve c;
  c.chi = uniform_grid(lo, hi, points);
  for (double x : c.chi) c.P.push_back(sigmoid(x, chi_c, width));
  return c;
}

}  // namespace

TEST_CASE("q-exponential") {
  for (double q : {-0.5, 0.0, 0.153, 0.9, 1.0, 1.3}) CHECK(q_exponential(0.0, q) == 1.0);
  for (double x : {-0.7, 0.0, 0.3, 2.0}) CHECK(q_exponential(x, 0.0) == doctest::Approx(1.0 + x).epsilon(1e-15));
  CHECK(q_exponential(-0.18, 0.153) == doctest::Approx(0.82258).epsilon(1e-5));
  CHECK(q_exponential(0.4, 1.0) == doctest::Approx(std::exp(0.4)).epsilon(1e-15));
  // Continuity through q = 1.
  CHECK(q_exponential(0.4, 1.0 - 1e-9) == doctest::Approx(std::exp(0.4)).epsilon(1e-8));
  CHECK(q_exponential(0.4, 1.0 + 1e-9) == doctest::Approx(std::exp(0.4)).epsilon(1e-8));
  try {
    q_exponential(-2.0, 0.0);
    FAIL("expected domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::domain);
  }
}

TEST_CASE("window identity (Eq. 7 form) holds to machine precision") {
  for (double eps : {0.05, 0.1, 0.2, 0.35, 0.49}) {
    for (auto [c, w] : {std::pair{0.6, 0.05}, {0.7, 0.012}, {0.93, 0.2}}) {
      const Window win = restricted_window(c, w, eps);
      CHECK(win.lo < c);
      CHECK(win.hi > c);
      // chi - c cancels; allow a few ulp of chi magnified by c / w.
      const double tol = 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, c / w);
      CHECK(std::abs(sigmoid(win.lo, c, w) - (0.5 - eps)) < tol);
      CHECK(std::abs(sigmoid(win.hi, c, w) - (0.5 + eps)) < tol);
    }
  }
  CHECK_THROWS_AS(restricted_window(0.6, 0.05, 0.5), Error);
  CHECK_THROWS_AS(restricted_window(0.6, 0.05, 0.0), Error);
}

TEST_CASE("rough sigmoid fit recovers generator parameters") {
  const auto curve = exact_g(0.1, 1.0, 91, 0.6, 0.05);
  const SigmoidFit f = fit_sigmoid_rough(curve, 0.1);
  CHECK(std::abs(f.chi_cL_star - 0.6) < 1e-6);
  CHECK(std::abs(f.delta_star - 0.05) < 1e-6);
  CHECK(f.window.lo < f.chi_cL_star);
  CHECK(f.window.hi > f.chi_cL_star);
  const Window w = restricted_window(f.chi_cL_star, f.delta_star, 0.1);
  CHECK(f.window.lo == w.lo);
  CHECK(f.window.hi == w.hi);
}

TEST_CASE("rough fit error paths") {
  PercolationCurve low;
  low.chi = uniform_grid(0.1, 1.0, 91);
  for (double x : low.chi) low.P.push_back(0.4 * sigmoid(x, 0.6, 0.05));
  try {
    fit_sigmoid_rough(low);
    FAIL("expected THRESHOLD_NOT_REACHED");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::threshold_not_reached);
  }
}

TEST_CASE("logit stage: slope 20, intercept -12 on exact g(0.6, 0.05)") {
  const Window w = restricted_window(0.6, 0.05, 0.1);
  const auto win = exact_g(w.lo, w.hi, 201, 0.6, 0.05);
  const LogitFit f = fit_logit(win);
  CHECK(f.slope == doctest::Approx(20.0).epsilon(1e-10));
  CHECK(f.intercept == doctest::Approx(-12.0).epsilon(1e-10));
  CHECK(std::abs(f.chi_cL - 0.6) < 1e-8);
  CHECK(std::abs(f.delta - 0.05) < 1e-8);
  CHECK(f.chi_cL == doctest::Approx(-f.intercept / f.slope));
  CHECK(f.points == 201);

  // Raw ln(P/(1-P)) has slope 2/Delta: check by finite differences.
  const double h = 1e-4;
  auto raw = [](double p) { return std::log(p / (1 - p)); };
  const double d = (raw(sigmoid(0.6 + h, 0.6, 0.05)) - raw(sigmoid(0.6 - h, 0.6, 0.05))) / (2 * h);
  CHECK(d == doctest::Approx(2.0 / 0.05).epsilon(1e-8));
}

TEST_CASE("logit self-consistency across generators") {
  for (auto [c, wd] : {std::pair{0.5927, 0.017}, {0.75, 0.03}, {0.9, 0.008}}) {
    const auto rough = exact_g(0.1, 1.0, 91, c, wd);
    const SigmoidFit s = fit_sigmoid_rough(rough);
    const auto win = exact_g(s.window.lo, s.window.hi, 201, c, wd);
    const LogitFit f = fit_logit(win);
    CHECK(std::abs(f.chi_cL - c) < 1e-8);
    CHECK(std::abs(f.delta - wd) < 1e-8);
  }
}

TEST_CASE("logit drops saturated points") {
  PercolationCurve c;
  c.chi = {0.1, 0.2, 0.3, 0.4, 0.5};
  c.P = {0.0, 0.3, 0.5, 1.0, 1.0};
  CHECK_THROWS_AS(fit_logit(c), Error);
  c.P = {0.0, 0.3, 0.5, 0.7, 1.0};
  const auto f = fit_logit(c);
  CHECK(f.points == 3);
}

TEST_CASE("monotone noisy data give positive widths") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int t = 0; t < 20; ++t) {
    PercolationCurve c = exact_g(0.1, 1.0, 91, 0.55 + 0.02 * t, 0.02 + 0.003 * t);
    for (double& p : c.P) p = std::clamp(p + noise(gen) * p * (1 - p), 0.0, 1.0);
    std::sort(c.P.begin(), c.P.end());
    CHECK(fit_sigmoid_rough(c).delta_star > 0);
  }
}

TEST_CASE("width scaling") {
  std::vector<ScalingPoint> pts;
  for (double L : {32.0, 48.0, 64.0, 96.0, 128.0}) pts.push_back({L, 2.0 * std::pow(L, -0.75)});
  const auto f = fit_width_scaling(pts);
  CHECK(f.nu == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK_FALSE(f.low_confidence);

  const std::vector<ScalingPoint> two = {{16, 0.05}, {32, 0.03}};
  CHECK(fit_width_scaling(two).low_confidence);
  const std::vector<ScalingPoint> one = {{16, 0.05}};
  CHECK_THROWS_AS(fit_width_scaling(one), Error);
  const std::vector<ScalingPoint> neg = {{16, 0.05}, {32, -0.03}, {64, 0.02}};
  CHECK_THROWS_AS(fit_width_scaling(neg), Error);
}

TEST_CASE("threshold scaling") {
  std::vector<ScalingPoint> pts;
  for (double L : {32.0, 48.0, 64.0, 96.0, 128.0}) pts.push_back({L, 0.75 - 1.2 * std::pow(L, -1.8)});
  const auto f = fit_threshold_scaling(pts);
  CHECK(std::abs(f.alpha + 1.8) <= 0.0025 + 1e-9);
  CHECK(f.chi_c_inf == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(f.alpha < 0);
  CHECK_FALSE(f.poor_scaling);

  pts.pop_back();
  pts.pop_back();
  CHECK_THROWS_AS(fit_threshold_scaling(pts), Error);

  // Scrambled data: no alpha fits, flagged but not fatal.
  const std::vector<ScalingPoint> noisy = {{32, 0.59}, {48, 0.60}, {64, 0.588}, {96, 0.601}, {128, 0.589}};
  CHECK(fit_threshold_scaling(noisy).poor_scaling);
}

TEST_CASE("critical susceptibility curve") {
  CHECK(critical_susceptibility(0.0, 0.36, 0.153) == kSiteThreshold);
  CHECK(critical_susceptibility(0.0, 0.8, -0.3) == kSiteThreshold);
  CHECK(critical_susceptibility(0.5, 0.360, 0.153) == doctest::Approx(0.7206).epsilon(1e-4));
}

TEST_CASE("q-exponential fit recovers a known generator") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> noise(0.0, 1e-4);
  std::vector<CurvePoint> pts;
  for (double pd = 0.0; pd <= 0.5001; pd += 0.05)
    pts.push_back({pd, critical_susceptibility(pd, 0.36, 0.153) + noise(gen), 1e-4});
  for (FitWeighting w : {FitWeighting::unweighted, FitWeighting::inverse_variance}) {
    const QExpFit f = fit_qexp_curve(pts, w);
    CHECK(std::abs(f.lambda - 0.36) < 1e-2);
    CHECK(std::abs(f.q - 0.153) < 3 * f.q_se);
    CHECK(std::abs(f.lambda - 0.36) < 3 * f.lambda_se);
    CHECK(f.lambda_se > 0);
    CHECK(f.q_se > 0);
    CHECK(f.lambda * (1 - f.q) * 0.5 < 1.0);
    for (double pd : {0.01, 0.03, 0.05}) {
      const double chi = f.critical_susceptibility(pd);
      CHECK(std::abs(chi - kSiteThreshold * std::exp(f.lambda * pd)) / chi < 1e-2);
    }
  }
  CHECK_THROWS_AS(fit_qexp_curve(std::span(pts).first(3)), Error);
}

TEST_CASE("q-exponential fit on exact data for every published row") {
  const double params[][2] = {{0.360, 0.153}, {0.7262, 0.0687}, {0.801, 0.351}, {0.585, -0.304}};
  for (const auto& p : params) {
    std::vector<CurvePoint> pts;
    for (double pd = 0.0; pd <= 0.5001; pd += 0.025) {
      const double chi = critical_susceptibility(pd, p[0], p[1]);
      if (chi > 1.0) break;
      pts.push_back({pd, chi, 0.0});
    }
    const QExpFit f = fit_qexp_curve(pts);
    CHECK(std::abs(f.lambda - p[0]) < 1e-3);
    CHECK(std::abs(f.q - p[1]) < 1e-3);
  }
}

TEST_CASE("power law fit") {
  std::vector<CurvePoint> pts;
  for (double pd = 0.05; pd <= 1.0001; pd += 0.05) pts.push_back({pd, 0.816 * std::pow(pd, 0.903), 0.0});
  for (PowerLawMethod m : {PowerLawMethod::nonlinear, PowerLawMethod::log_log}) {
    const PowerLawFit f = fit_power_law(pts, m);
    CHECK(f.sigma == doctest::Approx(0.816).epsilon(1e-8));
    CHECK(f.tau == doctest::Approx(0.903).epsilon(1e-8));
    CHECK(f.evaluate(0.5) == doctest::Approx(0.816 * std::pow(0.5, 0.903)).epsilon(1e-8));
  }
  // Non-positive q_b points are excluded; all excluded is an error.
  std::vector<CurvePoint> zeros = {{0.1, 0.0, 0.0}, {0.2, -0.1, 0.0}, {0.3, 0.0, 0.0}};
  CHECK_THROWS_AS(fit_power_law(zeros), Error);
  auto mixed = pts;
  mixed.push_back({0.0, 0.0, 0.0});
  CHECK(fit_power_law(mixed).tau == doctest::Approx(0.903).epsilon(1e-8));
}

TEST_CASE("linear regression and LM helpers") {
  const std::vector<double> x = {1, 2, 3, 4, 5}, y = {3, 5, 7, 9, 11};
  const LinearFit lin = linear_regression(x, y);
  CHECK(lin.slope == doctest::Approx(2.0));
  CHECK(lin.intercept == doctest::Approx(1.0));
  CHECK(lin.r_squared == doctest::Approx(1.0));

  // Rosenbrock-style residuals.
  ResidualFunction f = [](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    r.resize(2);
    r[0] = 10 * (p[1] - p[0] * p[0]);
    r[1] = 1 - p[0];
    return true;
  };
  Eigen::VectorXd start(2);
  start << -1.2, 1.0;
  const auto res = levenberg_marquardt(f, start, 2);
  CHECK(res.converged);
  CHECK(res.params[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.params[1] == doctest::Approx(1.0).epsilon(1e-6));
}
