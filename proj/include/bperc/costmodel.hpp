#pragma once

// Relative cost of a barrier strategy against independently placed
// barriers (joint site-bond percolation) at equal critical susceptibility.

#include <cstddef>
#include <optional>
#include <vector>

#include "bperc/fitting.hpp"
#include "bperc/lattice.hpp"

namespace bperc {

// Empirical joint site-bond critical curve p_b = B / (p_s + A).
struct JointCurve {
  double p_cb = kBondThreshold;
  double p_cs = kSiteThreshold;

  double a() const { return (p_cb - p_cs) / (1.0 - p_cb); }
  double b() const { return p_cb * (1.0 - p_cs) / (1.0 - p_cb); }

  // Throws for p_s < p_cs.
  double bond_threshold(double p_s) const;
  // Fraction of closed bonds needed at site occupation chi: 1 - p_b(chi).
  double barrier_fraction(double chi) const { return 1.0 - bond_threshold(chi); }
};

double joint_bond_threshold(double p_s);

// Closed-form inverse of chi_c(p_d). Throws ErrorCode::domain for
// chi < p_cs and ErrorCode::out_of_range when the result exceeds 1.
double pd_of_chi(double chi, const QExpFit& qexp);

double qb_of_chi(double chi, const QExpFit& qexp, const PowerLawFit& power);

struct CostResult {
  double chi_c = 0.0;
  double q_b_model = 0.0;
  double q_b_joint = 0.0;
  double eta = 0.0;     // percent; negative means fewer barriers
  double eta_se = 0.0;  // first-order propagation of the fit errors, 0 if none given
};

// Throws ErrorCode::undefined_ratio at chi = p_cs, where both fractions vanish.
CostResult relative_cost(double chi, const QExpFit& qexp, const PowerLawFit& power,
                         const JointCurve& joint = {});

struct CostCurve {
  std::vector<CostResult> rows;
  std::size_t skipped = 0;  // grid points whose inverted p_d fell outside [0, 1]
};

CostCurve cost_curve(const QExpFit& qexp, const PowerLawFit& power, double chi_lo, double chi_hi,
                     std::size_t points, const JointCurve& joint = {});

// Published (lambda, q, sigma, tau) parametrizations for each barrier model.
struct StrategyParameters {
  QExpFit qexp;
  PowerLawFit power;
};

std::optional<StrategyParameters> reference_parameters(BarrierModel model);

}  // namespace bperc
