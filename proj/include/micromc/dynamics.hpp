#pragma once

#include <cmath>
#include <stdexcept>

#include "micromc/target.hpp"
#include "micromc/types.hpp"

namespace micromc {

/// Position, unit momentum direction, accumulated log speed change, and the
/// cached target evaluation at x.  The cache always corresponds to the
/// current position, so one integrator step costs exactly one evaluation for
/// leapfrog and two for minimal-norm.
struct SamplerState {
  Vector x;
  Vector u;
  double log_r = 0.0;  // log |Pi| relative to the initial momentum magnitude
  double L_x = 0.0;
  Vector g_x;
};

/// Velocity Verlet coefficient of the two-stage minimal-norm scheme.
inline constexpr double kMinimalNormLambda = 0.19318;

/// Momentum angle beyond which a single update is treated as a divergence;
/// sinh/cosh stay far from overflow below this.
inline constexpr double kMaxMomentumAngle = 150.0;

/// Evaluates the target at x0 and assembles a state with unit direction u0.
inline SamplerState make_state(const TargetDistribution& target, const Vector& x0,
                               const Vector& u0, long long& grad_evals) {
  if (x0.size() != target.d || u0.size() != target.d)
    throw std::invalid_argument("make_state: dimension mismatch");
  const double n = u0.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::invalid_argument("make_state: direction must have positive finite norm");
  SamplerState s;
  s.x = x0;
  s.u = u0 / n;
  s.g_x.resize(target.d);
  target.eval(s.x, s.L_x, s.g_x);
  ++grad_evals;
  return s;
}

/// Drift map: x <- x + eps u at unit speed in rescaled time.
inline void position_update(SamplerState& s, double eps) { s.x += eps * s.u; }

/// Exact flow of the momentum part over rescaled time eps, using the cached
/// gradient.  With delta = eps |g| / d and e = -g / |g|,
///
///   u <- (u + (sinh(delta) + e.u (cosh(delta) - 1)) e)
///        / (cosh(delta) + e.u sinh(delta)),
///
/// and the log of that denominator is added to log_r: it is the factor by
/// which the momentum magnitude grows, which enters both the energy bookkeeping
/// and, in weighted-sample form, the microcanonical importance weights.
/// Returns false without touching the state when delta is too extreme to
/// evaluate; throws on a non-finite gradient.
inline bool momentum_update(SamplerState& s, double eps) {
  const double gnorm = s.g_x.norm();
  if (!std::isfinite(gnorm)) throw std::domain_error("momentum_update: non-finite gradient");
  if (gnorm == 0.0) return true;
  const double delta = eps * gnorm / static_cast<double>(s.x.size());
  if (!std::isfinite(delta) || std::abs(delta) > kMaxMomentumAngle) return false;

  const double sh = std::sinh(delta);
  const double sh_half = std::sinh(0.5 * delta);
  const double chm1 = 2.0 * sh_half * sh_half;  // cosh(delta) - 1
  const double inv_g = 1.0 / gnorm;
  // e = -g/|g| is not materialized; e-terms are expressed through g.
  const double eu = -s.g_x.dot(s.u) * inv_g;
  const double denom_m1 = chm1 + eu * sh;  // denominator - 1, for log1p
  s.u -= ((sh + eu * chm1) * inv_g) * s.g_x;
  s.u.normalize();
  s.log_r += std::log1p(denom_m1);
  return true;
}

/// One leapfrog step (half momentum, drift, half momentum), costing one fresh
/// gradient evaluation.  On a non-finite evaluation at the new position the
/// position, weight bookkeeping, and cache are restored and false is
/// returned; the caller is expected to resample the direction.
inline bool leapfrog_step(SamplerState& s, double eps, const TargetDistribution& target,
                          long long& grad_evals) {
  const double log_r0 = s.log_r;
  if (!momentum_update(s, 0.5 * eps)) return false;
  s.x += eps * s.u;
  target.eval(s.x, s.L_x, s.g_x);
  ++grad_evals;
  bool ok = std::isfinite(s.L_x) && s.g_x.allFinite();
  if (ok) ok = momentum_update(s, 0.5 * eps);
  if (!ok) {
    // u is unchanged since the drift, so the drift can be undone exactly.
    s.x -= eps * s.u;
    s.log_r = log_r0;
    target.eval(s.x, s.L_x, s.g_x);
    ++grad_evals;
  }
  return ok;
}

/// One two-stage minimal-norm step, costing two fresh gradient evaluations.
/// Same failure contract as leapfrog_step.
inline bool minimal_norm_step(SamplerState& s, double eps, const TargetDistribution& target,
                              long long& grad_evals) {
  constexpr double lam = kMinimalNormLambda;
  const double log_r0 = s.log_r;
  const Vector x0 = s.x;
  auto fail = [&]() {
    s.x = x0;
    s.log_r = log_r0;
    target.eval(s.x, s.L_x, s.g_x);
    ++grad_evals;
    return false;
  };

  if (!momentum_update(s, lam * eps)) return fail();
  s.x += 0.5 * eps * s.u;
  target.eval(s.x, s.L_x, s.g_x);
  ++grad_evals;
  if (!std::isfinite(s.L_x) || !s.g_x.allFinite()) return fail();

  if (!momentum_update(s, (1.0 - 2.0 * lam) * eps)) return fail();
  s.x += 0.5 * eps * s.u;
  target.eval(s.x, s.L_x, s.g_x);
  ++grad_evals;
  if (!std::isfinite(s.L_x) || !s.g_x.allFinite()) return fail();

  if (!momentum_update(s, lam * eps)) return fail();
  return true;
}

/// Energy drift since the start of a trajectory whose initial negative log
/// density was L0.  Exact integration keeps this at zero.
inline double energy_deviation(const SamplerState& s, double L0) {
  return static_cast<double>(s.x.size()) * s.log_r + (s.L_x - L0);
}

/// Microcanonical importance weight of a sample relative to a running
/// reference value L_ref (typically the smallest L seen), w = e^{-(L - L_ref)/d}.
inline double sample_weight(double L_x, double L_ref, Index d) {
  return std::exp(-(L_x - L_ref) / static_cast<double>(d));
}

}  // namespace micromc
