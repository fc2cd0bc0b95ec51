#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "micromc/autotune.hpp"
#include "micromc/samplers.hpp"
#include "micromc/targets.hpp"

namespace micromc {

enum class TuneMode { Auto, Grid, None };

std::string to_string(TuneMode m);
TuneMode parse_tune_mode(const std::string& s);
std::string to_string(Spacing s);
Spacing parse_spacing(const std::string& s);

/// Names one of the built-in benchmark targets plus its parameters.
struct TargetSpec {
  std::string name = "gaussian";
  Index d = 100;
  double kappa = 100.0;         // icg
  double Q = 0.1;               // rosenbrock
  std::uint64_t rotation_seed = 0;  // icg
  Spacing spacing = Spacing::Log;   // icg
  std::string returns_csv;      // sv
};

/// Builds the named target; throws std::invalid_argument for unknown names or
/// invalid parameters.
TargetDistribution resolve_target(const TargetSpec& spec);

struct ExperimentConfig {
  TargetSpec target;
  SamplerConfig sampler;
  TuneMode tune = TuneMode::None;
  int seeds = 4;
  std::uint64_t base_seed = 1;
  std::vector<double> eps_grid;   // grid mode
  std::vector<double> L_grid;     // grid mode
  TuneConfig tuning;              // auto mode
  /// Auto mode: charge tuning gradient evaluations to the ESS denominator.
  bool include_tuning_cost = true;
  /// Run the seed fan-out through std::async instead of a plain loop; the
  /// results are identical either way.
  bool parallel = false;
  /// Prefix for emitted files; empty writes nothing.
  std::string out_path;
};

struct SeedOutcome {
  std::uint64_t stream = 0;
  double ess = 0.0;
  double crossing = 0.0;  // grad evals at the threshold crossing; +inf if never
  ChainResult result;
};

struct GridCell {
  double eps = 0.0;
  double L = 0.0;
  double ess_mean = 0.0;
};

struct GridResult {
  std::vector<GridCell> cells;
  double best_eps = 0.0;
  double best_L = 0.0;
  double best_ess = 0.0;
  bool any_converged = false;
  long long total_grad_evals = 0;
};

struct ExperimentReport {
  std::string target_name;
  Index d = 0;
  Algorithm algorithm = Algorithm::MCLMC;
  Integrator integrator = Integrator::Leapfrog;
  double eps = 0.0;
  double L = 0.0;
  double threshold = 0.0;
  std::vector<SeedOutcome> per_seed;
  double ess_mean = 0.0;
  double ess_std = 0.0;
  long long tuning_cost = 0;
  bool tuned = false;
  TuningReport tuning;
  bool grid_used = false;
  GridResult grid;
};

/// ESS of one chain: 200 / (crossing + extra_cost), zero when the chain never
/// crosses the threshold.
SeedOutcome score_chain(ChainResult&& result, std::uint64_t stream, double threshold,
                        double extra_cost);

/// Exhaustive (eps, L) scan with cfg.seeds chains per cell; chains stop early
/// at the convergence threshold.  Ties keep the first cell.
GridResult grid_search(const TargetDistribution& target, const ExperimentConfig& cfg);

/// Resolves the target, applies the configured tuning mode, fans out seeded
/// chains, aggregates ESS, and emits files when out_path is set.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes rows as CSV with columns
/// step,grad_evals,b1,sigma,b2,varE_per_d,divergences.
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

void write_summary_json(const std::string& path, const ExperimentReport& report);

/// Writes <out_path>.summary.json plus <out_path>.seed<K>.csv per chain.
void emit_report(const ExperimentConfig& cfg, const ExperimentReport& report);

}  // namespace micromc
