#pragma once

#include "covdetect/core.hpp"

namespace covdetect {

/// Weighted sum of independent central chi-squared variables,
///   Q = sum_m weights_m * chi2_{dof}.
/// Every component shares the same (even) number of degrees of freedom.
struct GchiSqSpec {
  RVector weights;
  int dof_per_component = 2;

  /// Drops weights with |w| < 1e-12 max|w|; dof = 2 * blocks.
  [[nodiscard]] static GchiSqSpec from_weights(const RVector& raw, int blocks);

  [[nodiscard]] bool degenerate() const { return weights.size() == 0; }
  void validate() const;

  [[nodiscard]] double mean() const { return dof_per_component * weights.sum(); }
  [[nodiscard]] double variance() const { return 2.0 * dof_per_component * weights.squaredNorm(); }
};

enum class CdfMethod {
  imhof,        // numerical inversion of the characteristic function
  exponential,  // single component with two degrees of freedom, closed form
  tail_bound,   // x outside the Chernoff tail bounds; result is 0 or 1
  degenerate,   // all weights zero; step function at 0
  monte_carlo,  // the Imhof sum would be too long; 10^6 draws
};

struct CdfValue {
  double probability = 0.0;
  CdfMethod method = CdfMethod::imhof;
};

/// P(Q <= x). Absolute accuracy 1e-6 or better for every method except
/// monte_carlo (standard error <= 5e-4).
[[nodiscard]] CdfValue gchi2_cdf(const GchiSqSpec& spec, double x);

/// Chernoff bound on P(Q >= y).
[[nodiscard]] double gchi2_upper_tail_bound(const GchiSqSpec& spec, double y);

}  // namespace covdetect
