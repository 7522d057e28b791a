#include "bperc/costmodel.hpp"

#include <cmath>
#include <sstream>

#include "bperc/errors.hpp"

namespace bperc {

double JointCurve::bond_threshold(double p_s) const {
  if (!(p_s >= p_cs && p_s <= 1.0)) {
    std::ostringstream msg;
    msg << "site occupation " << p_s << " outside [" << p_cs << ", 1]; no finite bond threshold";
    fail(ErrorCode::domain, msg.str());
  }
  return b() / (p_s + a());
}

double joint_bond_threshold(double p_s) { return JointCurve{}.bond_threshold(p_s); }

double pd_of_chi(double chi, const QExpFit& qexp) {
  if (!(qexp.lambda > 0.0)) fail(ErrorCode::domain, "lambda must be positive to invert the critical curve");
  if (!(chi >= qexp.p_cs)) fail(ErrorCode::domain, "critical susceptibility below the pure-site threshold");
  double p_d;
  if (std::abs(1.0 - qexp.q) < 1e-12) {
    p_d = std::log(chi / qexp.p_cs) / qexp.lambda;
  } else {
    p_d = (1.0 - std::pow(qexp.p_cs / chi, 1.0 - qexp.q)) / ((1.0 - qexp.q) * qexp.lambda);
  }
  if (p_d > 1.0) {
    std::ostringstream msg;
    msg << "chi_c = " << chi << " needs p_d = " << p_d << " > 1";
    fail(ErrorCode::out_of_range, msg.str());
  }
  return p_d;
}

double qb_of_chi(double chi, const QExpFit& qexp, const PowerLawFit& power) {
  return power.evaluate(pd_of_chi(chi, qexp));
}

namespace {

double eta_of(double chi, const QExpFit& qexp, const PowerLawFit& power, const JointCurve& joint) {
  const double qj = joint.barrier_fraction(chi);
  return 100.0 * (qb_of_chi(chi, qexp, power) - qj) / qj;
}

double eta_uncertainty(double chi, const QExpFit& qexp, const PowerLawFit& power, const JointCurve& joint) {
  struct Param {
    double* value;
    double se;
  };
  QExpFit qe = qexp;
  PowerLawFit pw = power;
  const Param params[] = {{&qe.lambda, qexp.lambda_se}, {&qe.q, qexp.q_se}, {&pw.sigma, power.sigma_se},
                          {&pw.tau, power.tau_se}};
  double var = 0.0;
  for (const Param& p : params) {
    if (!(p.se > 0.0)) continue;
    const double base = *p.value;
    const double h = 1e-6 * std::max(1.0, std::abs(base));
    try {
      *p.value = base + h;
      const double up = eta_of(chi, qe, pw, joint);
      *p.value = base - h;
      const double down = eta_of(chi, qe, pw, joint);
      const double d = (up - down) / (2 * h);
      var += d * d * p.se * p.se;
    } catch (const Error&) {
      // Perturbation left the domain (chi at the p_d = 1 edge); no contribution.
    }
    *p.value = base;
  }
  return std::sqrt(var);
}

}  // namespace

CostResult relative_cost(double chi, const QExpFit& qexp, const PowerLawFit& power, const JointCurve& joint) {
  CostResult out;
  out.chi_c = chi;
  out.q_b_model = qb_of_chi(chi, qexp, power);
  out.q_b_joint = joint.barrier_fraction(chi);
  if (!(out.q_b_joint > 1e-12))
    fail(ErrorCode::undefined_ratio, "relative cost undefined where the joint barrier fraction vanishes");
  out.eta = 100.0 * (out.q_b_model - out.q_b_joint) / out.q_b_joint;
  out.eta_se = eta_uncertainty(chi, qexp, power, joint);
  return out;
}

CostCurve cost_curve(const QExpFit& qexp, const PowerLawFit& power, double chi_lo, double chi_hi,
                     std::size_t points, const JointCurve& joint) {
  if (points < 2 || !(chi_hi > chi_lo)) fail(ErrorCode::domain, "cost grid needs hi > lo and two points");
  CostCurve curve;
  for (std::size_t k = 0; k < points; ++k) {
    const double chi = chi_lo + (chi_hi - chi_lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    try {
      curve.rows.push_back(relative_cost(chi, qexp, power, joint));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::out_of_range) throw;
      ++curve.skipped;
    }
  }
  return curve;
}

std::optional<StrategyParameters> reference_parameters(BarrierModel model) {
  auto make = [](double lambda, double lambda_se, double q, double q_se, double sigma, double sigma_se,
                 double tau, double tau_se) {
    StrategyParameters p;
    p.qexp.lambda = lambda;
    p.qexp.lambda_se = lambda_se;
    p.qexp.q = q;
    p.qexp.q_se = q_se;
    p.power.sigma = sigma;
    p.power.sigma_se = sigma_se;
    p.power.tau = tau;
    p.power.tau_se = tau_se;
    return p;
  };
  switch (model) {
    case BarrierModel::sq2n_1: return make(0.360, 0.003, 0.153, 0.006, 0.441, 0.001, 0.923, 0.005);
    case BarrierModel::sq2n_2: return make(0.7262, 0.0003, 0.0687, 0.0003, 0.816, 0.004, 0.903, 0.006);
    case BarrierModel::sq2n_2_corners: return make(0.801, 0.007, 0.351, 0.004, 0.816, 0.004, 0.903, 0.006);
    case BarrierModel::sq2n_2_parallels: return make(0.585, 0.002, -0.304, 0.003, 0.816, 0.004, 0.903, 0.006);
    case BarrierModel::joint_site_bond: break;
  }
  return std::nullopt;
}

}  // namespace bperc
