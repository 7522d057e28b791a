#pragma once

// Microcanonical -> canonical conversion: first-spanning histograms become
// percolation probability curves by convolution with binomial weights.

#include <cstddef>
#include <span>
#include <vector>

#include "bperc/engine.hpp"

namespace bperc {

// F[n] = probability that spanning has occurred after at most n additions.
struct CumulativeSpanning {
  std::vector<double> F;

  std::size_t capacity() const noexcept { return F.empty() ? 0 : F.size() - 1; }
};

CumulativeSpanning cumulative(const SpanningHistogram& hist);

// Binomial(N, chi) mass, normalized, stored on the support window where it
// exceeds kWeightCutoff times the peak.
struct BinomialWeights {
  std::size_t first = 0;
  std::vector<double> w;

  double at(std::size_t n) const {
    return (n < first || n >= first + w.size()) ? 0.0 : w[n - first];
  }
};

inline constexpr double kWeightCutoff = 1e-30;

BinomialWeights binomial_weights(std::size_t trials, double chi);

struct PercolationCurve {
  int side = 0;
  std::vector<double> chi;
  std::vector<double> P;

  std::size_t size() const noexcept { return chi.size(); }
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

PercolationCurve percolation_probability(const CumulativeSpanning& cumulative,
                                         std::span<const double> chi_grid, int side = 0);

struct BarrierFraction {
  double value = 0.0;
  double standard_error = 0.0;
};

// Mean newly closed bonds per replica over 2L(L-1).
BarrierFraction effective_barrier_fraction(const SpanningHistogram& hist);

}  // namespace bperc
