#include "bperc/analysis.hpp"

#include <cmath>

#include "bperc/errors.hpp"

namespace bperc {

CumulativeSpanning cumulative(const SpanningHistogram& hist) {
  if (hist.replicas == 0 || hist.counts.empty())
    fail(ErrorCode::domain, "cannot build a cumulative curve from an empty histogram");
  CumulativeSpanning out;
  out.F.resize(hist.counts.size());
  const double r = static_cast<double>(hist.replicas);
  std::uint64_t running = 0;
  for (std::size_t n = 0; n < hist.counts.size(); ++n) {
    running += hist.counts[n];
    out.F[n] = static_cast<double>(running) / r;
  }
  return out;
}

BinomialWeights binomial_weights(std::size_t trials, double chi) {
  if (trials == 0) fail(ErrorCode::domain, "binomial weights need at least one trial");
  if (!(chi >= 0.0 && chi <= 1.0)) fail(ErrorCode::domain, "chi must lie in [0, 1]");
  if (chi == 0.0) return BinomialWeights{0, {1.0}};
  if (chi == 1.0) return BinomialWeights{trials, {1.0}};

  const double n_total = static_cast<double>(trials);
  const auto mode = std::min(trials, static_cast<std::size_t>(std::floor(chi * n_total)));
  const double up_ratio = chi / (1.0 - chi);
  const double down_ratio = (1.0 - chi) / chi;

  // Upward: B(n) = B(n-1) (N-n+1)/n chi/(1-chi).
  std::vector<double> upper;
  double w = 1.0;
  for (std::size_t n = mode + 1; n <= trials; ++n) {
    w *= (n_total - static_cast<double>(n) + 1.0) / static_cast<double>(n) * up_ratio;
    if (w < kWeightCutoff) break;
    upper.push_back(w);
  }
  // Downward: B(n) = B(n+1) (n+1)/(N-n) (1-chi)/chi.
  std::vector<double> lower;
  w = 1.0;
  for (std::size_t n = mode; n-- > 0;) {
    w *= (static_cast<double>(n) + 1.0) / (n_total - static_cast<double>(n)) * down_ratio;
    if (w < kWeightCutoff) break;
    lower.push_back(w);
  }

  BinomialWeights out;
  out.first = mode - lower.size();
  out.w.reserve(lower.size() + 1 + upper.size());
  out.w.assign(lower.rbegin(), lower.rend());
  out.w.push_back(1.0);
  out.w.insert(out.w.end(), upper.begin(), upper.end());

  double sum = 0.0;
  for (double x : out.w) sum += x;
  for (double& x : out.w) x /= sum;
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) fail(ErrorCode::domain, "grid needs hi > lo and at least two points");
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k)
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  return grid;
}

PercolationCurve percolation_probability(const CumulativeSpanning& cumulative,
                                         std::span<const double> chi_grid, int side) {
  if (cumulative.F.size() < 2) fail(ErrorCode::domain, "cumulative curve is empty");
  PercolationCurve curve;
  curve.side = side;
  curve.chi.assign(chi_grid.begin(), chi_grid.end());
  curve.P.reserve(chi_grid.size());
  const std::size_t trials = cumulative.capacity();
  for (double chi : chi_grid) {
    const BinomialWeights weights = binomial_weights(trials, chi);
    double p = 0.0;
    for (std::size_t k = 0; k < weights.w.size(); ++k) p += cumulative.F[weights.first + k] * weights.w[k];
    curve.P.push_back(p);
  }
  return curve;
}

BarrierFraction effective_barrier_fraction(const SpanningHistogram& hist) {
  if (hist.barriers.count == 0) fail(ErrorCode::domain, "histogram carries no barrier statistics");
  const LatticeGeometry geometry(hist.side);
  const double bonds = static_cast<double>(geometry.total_bonds());
  BarrierFraction out;
  out.value = hist.barriers.mean() / bonds;
  if (hist.barriers.count > 1)
    out.standard_error = std::sqrt(hist.barriers.variance() / static_cast<double>(hist.barriers.count)) / bonds;
  return out;
}

}  // namespace bperc
