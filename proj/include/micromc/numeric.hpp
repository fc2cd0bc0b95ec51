#pragma once

#include <cmath>
#include <limits>

namespace micromc {

/// log(e^a + e^b) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

/// cosh(x) - 1 = 2 sinh^2(x/2), accurate for small x.
inline double coshm1(double x) {
  const double s = std::sinh(0.5 * x);
  return 2.0 * s * s;
}

/// Digamma function psi(x) for x > 0.
///
/// Uses the recurrence psi(x) = psi(x+1) - 1/x to shift the argument above 6,
/// then the asymptotic series with Bernoulli coefficients through x^-12.
/// Absolute error is below 1e-12 over the arguments used here (half-integer
/// degrees of freedom of a Student-t likelihood).
inline double digamma(double x) {
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // psi(x) ~ ln x - 1/(2x) - sum_k B_{2k} / (2k x^{2k})
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
  return acc + std::log(x) - 0.5 * inv - series;
}

}  // namespace micromc
