#pragma once

// Test-only reference implementations, kept deliberately independent of the
// library's numerics: a high-accuracy RK4 integrator of the rescaled
// microcanonical equations of motion, finite-difference gradients, batch
// (non-streaming) weighted moments, and small statistical helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "micromc/rng.hpp"
#include "micromc/target.hpp"

namespace oracle {

using micromc::Index;
using micromc::Matrix;
using micromc::TargetDistribution;
using micromc::Vector;

struct Q0Point {
  Vector x;
  Vector u;
  double log_r = 0.0;
};

/// RK4 integration of the rescaled-time dynamics
///   x' = u,  u' = -(g - (u.g) u)/d,  (log r)' = -(u.g)/d,
/// over horizon S with fixed step h.  No renormalization or caching; every
/// derivative evaluation calls the target afresh.
inline Q0Point integrate_q0(const TargetDistribution& t, Vector x, Vector u, double S,
                            double h) {
  const double d = static_cast<double>(t.d);
  double L = 0.0;
  Vector g(t.d);
  struct Deriv {
    Vector dx, du;
    double dlr;
  };
  auto deriv = [&](const Vector& x_, const Vector& u_) {
    t.eval(x_, L, g);
    const double ug = u_.dot(g);
    return Deriv{u_, -(g - ug * u_) / d, -ug / d};
  };

  double log_r = 0.0;
  const long long n = std::llround(S / h);
  for (long long i = 0; i < n; ++i) {
    const Deriv k1 = deriv(x, u);
    const Deriv k2 = deriv(x + 0.5 * h * k1.dx, u + 0.5 * h * k1.du);
    const Deriv k3 = deriv(x + 0.5 * h * k2.dx, u + 0.5 * h * k2.du);
    const Deriv k4 = deriv(x + h * k3.dx, u + h * k3.du);
    x += (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    u += (h / 6.0) * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    log_r += (h / 6.0) * (k1.dlr + 2.0 * k2.dlr + 2.0 * k3.dlr + k4.dlr);
  }
  return {std::move(x), std::move(u), log_r};
}

/// Largest relative disagreement between the analytic gradient and a central
/// finite difference, coordinate by coordinate.
inline double max_rel_grad_error(const TargetDistribution& t, const Vector& x,
                                 double h0 = 1e-5) {
  double L0;
  Vector g(t.d), scratch(t.d);
  t.eval(x, L0, g);
  Vector xp = x;
  double worst = 0.0;
  for (Index i = 0; i < t.d; ++i) {
    const double h = h0 * std::max(1.0, std::abs(x[i]));
    double Lp, Lm;
    xp[i] = x[i] + h;
    t.eval(xp, Lp, scratch);
    xp[i] = x[i] - h;
    t.eval(xp, Lm, scratch);
    xp[i] = x[i];
    const double fd = (Lp - Lm) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
  }
  return worst;
}

/// Plain two-pass weighted batch moments (sums, then divide).
inline std::pair<Vector, Vector> batch_moments(const std::vector<Vector>& xs,
                                               const std::vector<double>& ws) {
  const Index d = xs.front().size();
  Vector m1 = Vector::Zero(d), m2 = Vector::Zero(d);
  double W = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m1 += ws[i] * xs[i];
    m2 += ws[i] * xs[i].cwiseProduct(xs[i]);
    W += ws[i];
  }
  return {m1 / W, m2 / W};
}

/// Stationary AR(1) series x_n = phi x_{n-1} + z_n, x_0 ~ N(0, 1/(1-phi^2)).
inline std::vector<double> ar1_series(long long n, double phi, std::uint64_t seed) {
  micromc::RngStream rng(seed, 77);
  std::vector<double> out(static_cast<std::size_t>(n));
  double x = rng.normal() / std::sqrt(1.0 - phi * phi);
  for (long long i = 0; i < n; ++i) {
    x = phi * x + rng.normal();
    out[static_cast<std::size_t>(i)] = x;
  }
  return out;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// CDF of a single coordinate of a uniform point on the unit sphere in R^d,
/// by Simpson quadrature of the density proportional to (1 - s^2)^{(d-3)/2}.
inline double sphere_marginal_cdf(double t, Index d) {
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double ex = 0.5 * static_cast<double>(d - 3);
  auto density = [&](double s) { return std::pow(std::max(0.0, 1.0 - s * s), ex); };
  auto simpson = [&](double a, double b) {
    const int n = 20000;  // even
    const double h = (b - a) / n;
    double acc = density(a) + density(b);
    for (int i = 1; i < n; ++i) acc += density(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  const double num = simpson(-1.0, t);
  const double den = num + simpson(t, 1.0);
  return num / den;
}

/// Kolmogorov-Smirnov statistic of samples against a reference CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    worst = std::max(worst, std::abs((static_cast<double>(i) + 1.0) / n - F));
    worst = std::max(worst, std::abs(static_cast<double>(i) / n - F));
  }
  return worst;
}

}  // namespace oracle
