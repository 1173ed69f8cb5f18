#pragma once

#include <vector>

namespace fbcov {

/// Gauss-Laguerre rule for integrals of f(x) e^{-x} over [0, inf).
struct QuadratureRule {
  int order = 0;
  std::vector<double> nodes;    // ascending roots of L_order
  std::vector<double> weights;  // positive, sum to 1
};

/// Nodes by Newton iteration on the three-term recurrence, weights
/// w = x / ((n+1)^2 L_{n+1}(x)^2). Valid for 1 <= order <= 64; throws
/// std::invalid_argument outside that range.
QuadratureRule gauss_laguerre(int order);

/// Upper tail of the standard normal distribution.
double q_function(double x);

/// Inverse of q_function on (0, 1). Throws std::domain_error otherwise.
double q_inverse(double p);

/// gamma(s, x) = int_0^x t^{s-1} e^{-t} dt, for s > 0, x >= 0.
///
/// Power series below x = s + 1, otherwise Gamma(s) minus the upper function
/// evaluated by a Lentz continued fraction. Relative accuracy ~1e-14 for the
/// moderate s used here (s = 2 / alpha).
double lower_incomplete_gamma(double s, double x);

/// Gamma(s, x), the complementary upper function.
double upper_incomplete_gamma(double s, double x);

}  // namespace fbcov
