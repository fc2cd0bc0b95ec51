#pragma once

#include <cmath>
#include <stdexcept>

#include "micromc/samplers.hpp"

namespace micromc {

/// Knobs of the two-stage hyperparameter tuner.  Defaults follow the scheme
/// the library was validated with; varE_target_per_d = 5e-4 targets the
/// asymptotic-bias plateau, with 3e-4 as the conservative alternative.
struct TuneConfig {
  double eps0 = 0.5;
  int rounds = 3;
  long long steps_per_round = 300;
  double burn_in_fraction = 0.1;
  double varE_target_per_d = 5e-4;
  int max_halvings = 8;

  long long refine_steps = 300;
  int refine_max_doublings = 3;
  double refine_factor = 0.4;
};

struct TuningReport {
  double eps = 0.0;
  double L = 0.0;
  double sigma_eff = 0.0;       // sqrt of the mean marginal variance
  double initial_L = 0.0;       // sigma_eff * sqrt(d)
  double varE_per_d = 0.0;      // measured in the last step-size round
  double mean_neff_fraction = 0.0;
  long long grad_evals = 0;     // total tuning cost in gradient evaluations
  long long refine_steps_used = 0;
  int halvings = 0;
  bool refine_ok = false;
};

/// Multiplicative step-size correction from a measured energy-error variance:
/// eps <- eps (target / measured)^{1/4}, following Var[E]/d ~ eps^4.
inline double step_size_update(double eps, double varE_per_d, double target_per_d) {
  if (!(eps > 0.0) || !(varE_per_d > 0.0) || !(target_per_d > 0.0))
    throw std::invalid_argument("step_size_update: all arguments must be > 0");
  return eps * std::pow(target_per_d / varE_per_d, 0.25);
}

/// First guess of the decoherence length from the effective scale of the
/// target: L = sigma_eff sqrt(d).
inline double initial_decoherence_length(double sigma_eff, Index d) {
  if (!(sigma_eff > 0.0) || d < 1)
    throw std::invalid_argument("initial_decoherence_length: need sigma_eff > 0, d >= 1");
  return sigma_eff * std::sqrt(static_cast<double>(d));
}

/// Refined decoherence length from the measured decorrelation distance
/// l = eps / mean(n_eff / n): L = factor * l.
inline double refined_length(double eps, double mean_neff_fraction, double factor = 0.4) {
  if (!(eps > 0.0) || !(mean_neff_fraction > 0.0) || !(factor > 0.0))
    throw std::invalid_argument("refined_length: all arguments must be > 0");
  return factor * eps / mean_neff_fraction;
}

/// Tunes (eps, L) for a microcanonical sampler: several short rounds of
/// step-size adaptation driven by the energy-error variance, then a
/// decoherence-length refinement from per-coordinate effective sample sizes.
/// The state persists across rounds, so early rounds double as burn-in.
/// Throws when the step size collapses without producing a finite energy
/// variance.
TuningReport tune(const TargetDistribution& target, Algorithm alg, Integrator integ,
                  const TuneConfig& cfg, RngStream& rng);

}  // namespace micromc
