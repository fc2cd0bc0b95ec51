#include "micromc/autotune.hpp"

#include <cmath>
#include <stdexcept>

namespace micromc {

namespace {

struct RoundStats {
  double varE = 0.0;
  double sigma_eff = 0.0;
  long long divergences = 0;
  bool finite = false;
};

/// Advances the state by `steps` iterations and measures the energy-error
/// variance and marginal position variance over the post-burn-in window.
RoundStats run_round(const TargetDistribution& t, detail::Q0Kernel& kernel,
                     SamplerState& s, long long steps, long long burn_in,
                     RngStream& rng) {
  RoundStats out;
  RunningStat energy;
  MomentAccumulator pos(t.d);
  for (long long n = 0; n < steps; ++n) {
    kernel.iterate(s, n, rng);
    if (n < burn_in) continue;
    energy.add(static_cast<double>(t.d) * s.log_r + s.L_x);
    pos.accumulate(s.x, 1.0);
  }
  out.varE = energy.variance();
  const Vector var = pos.second_moment().array() - pos.mean().array().square();
  out.sigma_eff = std::sqrt(std::max(0.0, var.mean()));
  out.divergences = kernel.divergences;
  out.finite = std::isfinite(out.varE) && std::isfinite(out.sigma_eff) &&
               out.sigma_eff > 0.0 && 10 * out.divergences <= steps;
  return out;
}

}  // namespace

TuningReport tune(const TargetDistribution& target, Algorithm alg, Integrator integ,
                  const TuneConfig& cfg, RngStream& rng) {
  if (cfg.rounds < 1 || cfg.steps_per_round < 10)
    throw std::invalid_argument("tune: need at least 1 round of at least 10 steps");
  if (cfg.refine_steps < 50)
    throw std::invalid_argument("tune: refinement needs at least 50 steps");
  const Index d = target.d;
  TuningReport report;

  long long grads = 0;
  Vector x0 = target.initial_draw ? target.initial_draw(rng) : rng.normal_vector(d);
  SamplerState s = make_state(target, x0, rng.unit_vector(d), grads);
  if (!std::isfinite(s.L_x) || !s.g_x.allFinite())
    throw std::runtime_error("tune: target is not finite at the initial point");

  double eps = cfg.eps0;
  double sigma = 1.0;
  const long long burn_in =
      std::llround(cfg.burn_in_fraction * static_cast<double>(cfg.steps_per_round));

  // Step-size rounds: run, measure Var[E], correct eps by the fourth-root
  // rule.  A round with non-finite or divergence-dominated output is retried
  // from its entry state at half the step size.
  for (int r = 0; r < cfg.rounds; ++r) {
    RoundStats stats;
    for (;;) {
      const SamplerState entry = s;
      detail::Q0Kernel kernel(target, alg, integ, eps,
                              initial_decoherence_length(sigma, d));
      stats = run_round(target, kernel, s, cfg.steps_per_round, burn_in, rng);
      grads += kernel.grad_evals;
      if (stats.finite) break;
      s = entry;
      eps *= 0.5;
      if (++report.halvings > cfg.max_halvings)
        throw std::runtime_error("tune: step size collapsed without a finite energy variance");
    }
    sigma = stats.sigma_eff;
    report.varE_per_d = stats.varE / static_cast<double>(d);
    if (stats.varE > 0.0)
      eps = step_size_update(eps, report.varE_per_d, cfg.varE_target_per_d);
  }

  report.eps = eps;
  report.sigma_eff = sigma;
  report.initial_L = initial_decoherence_length(sigma, d);
  report.L = report.initial_L;

  // Decoherence-length refinement: measure per-coordinate effective sample
  // counts at (eps, initial_L), and keep doubling the window until the chain
  // spans at least 10 decorrelation lengths.
  long long n_steps = cfg.refine_steps;
  for (int attempt = 0; attempt <= cfg.refine_max_doublings; ++attempt) {
    detail::Q0Kernel kernel(target, alg, integ, eps, report.initial_L);
    Matrix samples(n_steps + 1, d);
    samples.row(0) = s.x;
    for (long long n = 0; n < n_steps; ++n) {
      kernel.iterate(s, n, rng);
      samples.row(n + 1) = s.x;
    }
    grads += kernel.grad_evals;
    report.refine_steps_used = n_steps;

    const Vector neff = autocorr_neff(samples);
    if (!neff.allFinite()) break;  // undefined on some coordinate; keep initial_L
    const double frac = neff.mean() / static_cast<double>(samples.rows());
    report.mean_neff_fraction = frac;
    if (!(frac > 0.0)) break;
    if (frac > 10.0 / static_cast<double>(samples.rows())) {
      report.L = refined_length(eps, frac, cfg.refine_factor);
      report.refine_ok = true;
      break;
    }
    n_steps *= 2;  // chain too short to resolve the decorrelation length
  }

  report.grad_evals = grads;
  return report;
}

}  // namespace micromc
