#include "micromc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace micromc {

BiasSummary second_moment_bias(const Vector& m2, const Vector& truth) {
  if (m2.size() != truth.size())
    throw std::invalid_argument("second_moment_bias: dimension mismatch");
  if (m2.size() == 0)
    throw std::invalid_argument("second_moment_bias: empty input");
  if ((truth.array() == 0.0).any())
    throw std::invalid_argument("second_moment_bias: truth entries must be nonzero");
  const Vector z = (m2 - truth).cwiseQuotient(truth);
  BiasSummary out;
  out.b1 = z.mean();
  const double b2sq = z.squaredNorm() / static_cast<double>(z.size());
  out.b2 = std::sqrt(b2sq);
  out.sigma = std::sqrt(std::max(0.0, b2sq - out.b1 * out.b1));
  return out;
}

double entropy_bias_sq(const Vector& observable_means, double truth) {
  if (observable_means.size() == 0)
    throw std::invalid_argument("entropy_bias_sq: empty input");
  return (observable_means.array() - truth).square().mean();
}

Vector autocorr_neff(const Matrix& samples) {
  const Index n = samples.rows();
  const Index d = samples.cols();
  if (n < 50) throw std::invalid_argument("autocorr_neff: need at least 50 samples");
  Vector neff(d);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> centered(static_cast<std::size_t>(n));
  for (Index j = 0; j < d; ++j) {
    const double mu = samples.col(j).mean();
    double c0 = 0.0;
    for (Index i = 0; i < n; ++i) {
      centered[static_cast<std::size_t>(i)] = samples(i, j) - mu;
      c0 += centered[static_cast<std::size_t>(i)] * centered[static_cast<std::size_t>(i)];
    }
    c0 /= static_cast<double>(n);
    if (!(c0 > 0.0) || !std::isfinite(c0)) {
      neff[j] = nan;
      continue;
    }

    auto rho = [&](Index k) {
      double c = 0.0;
      for (Index i = 0; i + k < n; ++i)
        c += centered[static_cast<std::size_t>(i)] * centered[static_cast<std::size_t>(i + k)];
      return c / (static_cast<double>(n) * c0);
    };

    // Geyer initial positive sequence: sum pair sums Gamma_m = rho_{2m} +
    // rho_{2m+1} until the first nonpositive pair.
    double tau = -1.0;
    for (Index m = 0; 2 * m + 1 < n; ++m) {
      const double gamma = rho(2 * m) + rho(2 * m + 1);
      if (gamma <= 0.0) break;
      tau += 2.0 * gamma;
    }
    neff[j] = std::isfinite(tau) && tau > 0.0 ? static_cast<double>(n) / tau : nan;
  }
  return neff;
}

double crossing_point(const std::vector<CurvePoint>& curve, double threshold) {
  if (curve.empty()) throw std::invalid_argument("crossing_point: empty curve");
  if (!(threshold > 0.0)) throw std::invalid_argument("crossing_point: threshold must be > 0");
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i].grad_evals >= curve[i - 1].grad_evals))
      throw std::invalid_argument("crossing_point: curve must be ordered by grad_evals");
  }
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!(curve[i].value <= threshold)) continue;
    if (i == 0) return curve[0].grad_evals;
    const CurvePoint& lo = curve[i - 1];
    const CurvePoint& hi = curve[i];
    if (!(hi.value > 0.0) || !(lo.value > hi.value)) return hi.grad_evals;
    // Interpolate in log-log space, where bias decay is close to linear.
    const double t = (std::log(lo.value) - std::log(threshold)) /
                     (std::log(lo.value) - std::log(hi.value));
    return std::exp(std::log(lo.grad_evals) +
                    t * (std::log(hi.grad_evals) - std::log(lo.grad_evals)));
  }
  return std::numeric_limits<double>::infinity();
}

double ess_from_curve(const std::vector<CurvePoint>& curve, double threshold) {
  const double n = crossing_point(curve, threshold);
  return std::isinf(n) ? 0.0 : 200.0 / n;
}

}  // namespace micromc
