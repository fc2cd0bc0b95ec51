#pragma once

#include <cmath>
#include <stdexcept>

#include "micromc/dynamics.hpp"
#include "micromc/rng.hpp"

namespace micromc {

/// Replaces the direction with a fresh isotropic draw.  Position, weights,
/// and energy bookkeeping are untouched: the dynamics only depends on the
/// direction of the momentum, so this costs nothing in energy.
inline void full_bounce(SamplerState& s, RngStream& rng) {
  s.u = rng.unit_vector(s.u.size());
}

/// Strength of the per-step partial momentum refresh that decorrelates the
/// direction with decoherence length L: after n steps of size eps,
/// E[u_n . u_0] = e^{-n eps / L}.  That requires nu^2 = (e^{2 eps / L} - 1)/d.
/// An infinite L gives nu = 0 (no refresh).
inline double nu_coefficient(double eps, double L, Index d) {
  if (!(eps > 0.0) || !(L > 0.0) || d < 1)
    throw std::invalid_argument("nu_coefficient: need eps > 0, L > 0, d >= 1");
  if (std::isinf(L)) return 0.0;
  return std::sqrt(std::expm1(2.0 * eps / L) / static_cast<double>(d));
}

/// Partial refresh u <- (u + nu z) / |u + nu z| with z standard normal.
inline void partial_refresh(SamplerState& s, double nu, RngStream& rng) {
  if (nu == 0.0) return;
  const Index d = s.u.size();
  for (;;) {
    Vector z = rng.normal_vector(d);
    z = s.u + nu * z;
    const double n = z.norm();
    if (n > 0.0) {
      s.u = z / n;
      return;
    }
  }
}

}  // namespace micromc
