#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "micromc/decoherence.hpp"
#include "micromc/dynamics.hpp"
#include "micromc/estimators.hpp"
#include "micromc/rng.hpp"
#include "micromc/target.hpp"

namespace micromc {

enum class Algorithm { MCHMC, MCLMC, Q2, UHMC };
enum class Integrator { Leapfrog, MinimalNorm };

std::string to_string(Algorithm a);
std::string to_string(Integrator i);
Algorithm parse_algorithm(const std::string& s);
Integrator parse_integrator(const std::string& s);

/// Fresh gradient evaluations consumed by one step of the integrator.
inline int grads_per_step(Integrator i) { return i == Integrator::MinimalNorm ? 2 : 1; }

/// Geometric checkpoint schedule over gradient evaluations: records at
/// roughly start, start*ratio, start*ratio^2, ...
struct CheckpointSchedule {
  double start = 100.0;
  double ratio = 1.1;
};

struct SamplerConfig {
  Algorithm algorithm = Algorithm::MCLMC;
  Integrator integrator = Integrator::Leapfrog;
  double eps = 0.5;
  double L = std::numeric_limits<double>::infinity();
  long long steps = 10000;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  CheckpointSchedule checkpoints;
  /// Stop once the checkpointed convergence metric falls to this value
  /// (0 disables; runs always make at least one step).
  double stop_below_b2 = 0.0;
  /// Record pooled-moment snapshots at these step counts.
  std::vector<long long> snapshot_steps;
  /// Keep the raw chain (row n = state after n steps); used by tuning.
  bool record_samples = false;
};

/// One row of a convergence report, written at checkpoints in gradient
/// evaluations.  For targets with second-moment truth, b1/sigma/b2 are the
/// relative-error decomposition; for entropy-metric targets they are the
/// analogous absolute entropy errors; NaN when the target carries neither.
struct ConvergenceRow {
  long long step = 0;
  double grad_evals = 0.0;
  double b1 = 0.0;
  double sigma = 0.0;
  double b2 = 0.0;
  double varE_per_d = 0.0;
  long long divergences = 0;
};

/// Moment accumulator together with the log weight reference its weights were
/// measured against, so accumulators from chains with different references
/// can be pooled on a common scale.
struct MomentSnapshot {
  long long step = 0;
  MomentAccumulator moments{0};
  double log_ref = 0.0;
};

/// Pools snapshots from independent chains onto the smallest common weight
/// reference.  All snapshots must share the dimension.
MomentAccumulator pool_moments(const std::vector<MomentSnapshot>& parts);

struct ChainResult {
  MomentSnapshot moments;           // evaluation-coordinate moments, final
  MomentSnapshot entropy_moments;   // entropy observable means (dim 0 if unused)
  std::vector<MomentSnapshot> snapshots;
  std::vector<ConvergenceRow> rows;

  long long steps_run = 0;
  long long grad_evals = 0;
  long long divergences = 0;
  bool divergence_flag = false;     // more than 10% of steps diverged

  double energy_mean_dev = 0.0;     // mean energy deviation within segments
  double energy_var_per_d = 0.0;    // Var[E]/d within segments

  Vector final_x;
  Matrix samples;                   // (steps_run + 1) x d when recorded

  double eps = 0.0;
  double L = 0.0;
};

/// Runs one chain of the configured algorithm from a fresh initial draw.
/// Deterministic in (cfg.seed, cfg.stream).
ChainResult run_chain(const TargetDistribution& target, const SamplerConfig& cfg);

/// Convenience wrappers that check cfg.algorithm agrees.
ChainResult run_mchmc(const TargetDistribution& target, const SamplerConfig& cfg);
ChainResult run_mclmc(const TargetDistribution& target, const SamplerConfig& cfg);
ChainResult run_q2(const TargetDistribution& target, const SamplerConfig& cfg);
ChainResult run_uhmc(const TargetDistribution& target, const SamplerConfig& cfg);

/// Bias threshold at which a target's convergence metric corresponds to 200
/// effective samples: 0.1 for relative second-moment error, sqrt(0.0165) for
/// the entropy metric, NaN when the target carries no reference values.
double convergence_threshold(const TargetDistribution& target);

namespace detail {

/// Shared microcanonical stepping core: decoherence policy plus one
/// integrator step, with divergence recovery (restore position, resample
/// direction).  Step indices are 0-based; step 0 applies the scheduled bounce
/// first, matching a trajectory that begins with a fresh direction.
class Q0Kernel {
 public:
  Q0Kernel(const TargetDistribution& target, Algorithm alg, Integrator integ,
           double eps, double L);

  void iterate(SamplerState& s, long long n, RngStream& rng);

  long long grad_evals = 0;
  long long divergences = 0;
  double eps() const { return eps_; }
  double nu() const { return nu_; }
  long long bounce_every() const { return bounce_every_; }

 private:
  const TargetDistribution* target_;
  Algorithm alg_;
  Integrator integ_;
  double eps_;
  double nu_ = 0.0;
  long long bounce_every_ = 0;  // 0 means never
};

}  // namespace detail

}  // namespace micromc
