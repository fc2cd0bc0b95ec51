#include "micromc/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <stdexcept>

#include <json.hpp>

namespace micromc {

std::string to_string(TuneMode m) {
  switch (m) {
    case TuneMode::Auto: return "auto";
    case TuneMode::Grid: return "grid";
    case TuneMode::None: return "none";
  }
  return "?";
}

TuneMode parse_tune_mode(const std::string& s) {
  if (s == "auto") return TuneMode::Auto;
  if (s == "grid") return TuneMode::Grid;
  if (s == "none") return TuneMode::None;
  throw std::invalid_argument("unknown tune mode '" + s + "'");
}

std::string to_string(Spacing s) { return s == Spacing::Log ? "log" : "linear"; }

Spacing parse_spacing(const std::string& s) {
  if (s == "log") return Spacing::Log;
  if (s == "linear") return Spacing::Linear;
  throw std::invalid_argument("unknown spacing '" + s + "'");
}

TargetDistribution resolve_target(const TargetSpec& spec) {
  if (spec.name == "gaussian") return make_standard_gaussian(spec.d);
  if (spec.name == "icg")
    return make_ill_conditioned_gaussian(spec.d, spec.kappa, spec.rotation_seed,
                                         spec.spacing);
  if (spec.name == "bimodal") return make_bimodal(spec.d);
  if (spec.name == "rosenbrock") return make_rosenbrock(spec.d, spec.Q);
  if (spec.name == "funnel") return make_funnel(spec.d);
  if (spec.name == "cauchy") return make_cauchy(spec.d);
  if (spec.name == "sv") {
    if (spec.returns_csv.empty())
      throw std::invalid_argument("target sv requires a returns csv");
    return make_stochastic_volatility(load_returns_csv(spec.returns_csv));
  }
  throw std::invalid_argument("unknown target '" + spec.name + "'");
}

SeedOutcome score_chain(ChainResult&& result, std::uint64_t stream, double threshold,
                        double extra_cost) {
  SeedOutcome out;
  out.stream = stream;
  out.result = std::move(result);
  out.crossing = std::numeric_limits<double>::infinity();
  if (std::isfinite(threshold)) {
    std::vector<CurvePoint> curve;
    curve.reserve(out.result.rows.size());
    for (const auto& row : out.result.rows) curve.push_back({row.grad_evals, row.b2});
    if (!curve.empty()) out.crossing = crossing_point(curve, threshold);
  }
  out.ess = std::isfinite(out.crossing) ? 200.0 / (out.crossing + extra_cost) : 0.0;
  return out;
}

namespace {

SamplerConfig seeded_config(const ExperimentConfig& cfg, double eps, double L,
                            std::uint64_t stream) {
  SamplerConfig sc = cfg.sampler;
  sc.eps = eps;
  sc.L = L;
  sc.seed = cfg.base_seed;
  sc.stream = stream;
  return sc;
}

std::vector<SeedOutcome> fan_out(const TargetDistribution& target,
                                 const ExperimentConfig& cfg, double eps, double L,
                                 double threshold, double extra_cost) {
  std::vector<SeedOutcome> outcomes(static_cast<std::size_t>(cfg.seeds));
  auto one = [&](int i) {
    const auto stream = static_cast<std::uint64_t>(i + 1);
    return score_chain(run_chain(target, seeded_config(cfg, eps, L, stream)), stream,
                       threshold, extra_cost);
  };
  if (cfg.parallel) {
    std::vector<std::future<SeedOutcome>> futures;
    futures.reserve(outcomes.size());
    for (int i = 0; i < cfg.seeds; ++i)
      futures.push_back(std::async(std::launch::async, one, i));
    for (int i = 0; i < cfg.seeds; ++i) outcomes[static_cast<std::size_t>(i)] = futures[static_cast<std::size_t>(i)].get();
  } else {
    for (int i = 0; i < cfg.seeds; ++i) outcomes[static_cast<std::size_t>(i)] = one(i);
  }
  return outcomes;
}

}  // namespace

GridResult grid_search(const TargetDistribution& target, const ExperimentConfig& cfg) {
  if (cfg.eps_grid.empty() || cfg.L_grid.empty())
    throw std::invalid_argument("grid_search: eps_grid and L_grid must be nonempty");
  if (cfg.seeds < 1) throw std::invalid_argument("grid_search: seeds must be >= 1");
  const double threshold = convergence_threshold(target);

  GridResult out;
  ExperimentConfig scan = cfg;
  if (std::isfinite(threshold)) scan.sampler.stop_below_b2 = threshold;
  for (const double eps : cfg.eps_grid) {
    for (const double L : cfg.L_grid) {
      double sum = 0.0;
      for (const auto& outcome : fan_out(target, scan, eps, L, threshold, 0.0)) {
        sum += outcome.ess;
        out.total_grad_evals += outcome.result.grad_evals;
      }
      GridCell cell{eps, L, sum / static_cast<double>(cfg.seeds)};
      if (out.cells.empty() || cell.ess_mean > out.best_ess) {
        out.best_eps = cell.eps;
        out.best_L = cell.L;
        out.best_ess = cell.ess_mean;
      }
      out.cells.push_back(cell);
    }
  }
  out.any_converged = out.best_ess > 0.0;
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.seeds < 1) throw std::invalid_argument("run_experiment: seeds must be >= 1");
  const TargetDistribution target = resolve_target(cfg.target);

  ExperimentReport report;
  report.target_name = target.name;
  report.d = target.d;
  report.algorithm = cfg.sampler.algorithm;
  report.integrator = cfg.sampler.integrator;
  report.threshold = convergence_threshold(target);

  double eps = cfg.sampler.eps;
  double L = cfg.sampler.L;
  double extra_cost = 0.0;
  switch (cfg.tune) {
    case TuneMode::Auto: {
      RngStream rng(cfg.base_seed, /*stream=*/0);
      report.tuning =
          tune(target, cfg.sampler.algorithm, cfg.sampler.integrator, cfg.tuning, rng);
      report.tuned = true;
      report.tuning_cost = report.tuning.grad_evals;
      eps = report.tuning.eps;
      L = report.tuning.L;
      if (cfg.include_tuning_cost) extra_cost = static_cast<double>(report.tuning_cost);
      break;
    }
    case TuneMode::Grid: {
      report.grid = grid_search(target, cfg);
      report.grid_used = true;
      report.tuning_cost = report.grid.total_grad_evals;
      eps = report.grid.best_eps;
      L = report.grid.best_L;
      break;
    }
    case TuneMode::None:
      break;
  }

  report.eps = eps;
  report.L = L;
  report.per_seed = fan_out(target, cfg, eps, L, report.threshold, extra_cost);

  double mean = 0.0;
  for (const auto& o : report.per_seed) mean += o.ess;
  mean /= static_cast<double>(report.per_seed.size());
  double var = 0.0;
  for (const auto& o : report.per_seed) var += (o.ess - mean) * (o.ess - mean);
  report.ess_mean = mean;
  report.ess_std = report.per_seed.size() > 1
                       ? std::sqrt(var / static_cast<double>(report.per_seed.size() - 1))
                       : 0.0;

  if (!cfg.out_path.empty()) emit_report(cfg, report);
  return report;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "step,grad_evals,b1,sigma,b2,varE_per_d,divergences\n";
  for (const auto& r : rows) {
    out << r.step << ',' << fmt(r.grad_evals) << ',' << fmt(r.b1) << ',' << fmt(r.sigma)
        << ',' << fmt(r.b2) << ',' << fmt(r.varE_per_d) << ',' << r.divergences << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

void write_summary_json(const std::string& path, const ExperimentReport& report) {
  nlohmann::json j;
  j["target"] = report.target_name;
  j["d"] = report.d;
  j["algorithm"] = to_string(report.algorithm);
  j["integrator"] = to_string(report.integrator);
  j["eps"] = report.eps;
  j["L"] = report.L;
  j["threshold"] = report.threshold;
  j["ess_mean"] = report.ess_mean;
  j["ess_std"] = report.ess_std;
  j["tuning_cost"] = report.tuning_cost;
  j["seeds"] = report.per_seed.size();

  auto& per_seed = j["per_seed"] = nlohmann::json::array();
  for (const auto& o : report.per_seed) {
    nlohmann::json s;
    s["stream"] = o.stream;
    s["ess"] = o.ess;
    s["crossing_grad_evals"] = o.crossing;
    s["grad_evals"] = o.result.grad_evals;
    s["steps"] = o.result.steps_run;
    s["divergences"] = o.result.divergences;
    s["divergence_flag"] = o.result.divergence_flag;
    s["varE_per_d"] = o.result.energy_var_per_d;
    s["energy_mean_dev"] = o.result.energy_mean_dev;
    if (!o.result.rows.empty()) s["final_b2"] = o.result.rows.back().b2;
    per_seed.push_back(std::move(s));
  }

  if (report.tuned) {
    nlohmann::json t;
    t["eps"] = report.tuning.eps;
    t["L"] = report.tuning.L;
    t["initial_L"] = report.tuning.initial_L;
    t["sigma_eff"] = report.tuning.sigma_eff;
    t["varE_per_d"] = report.tuning.varE_per_d;
    t["mean_neff_fraction"] = report.tuning.mean_neff_fraction;
    t["grad_evals"] = report.tuning.grad_evals;
    t["refine_steps_used"] = report.tuning.refine_steps_used;
    t["halvings"] = report.tuning.halvings;
    t["refine_ok"] = report.tuning.refine_ok;
    j["tuning"] = std::move(t);
  }
  if (report.grid_used) {
    nlohmann::json g;
    g["best_eps"] = report.grid.best_eps;
    g["best_L"] = report.grid.best_L;
    g["best_ess"] = report.grid.best_ess;
    g["any_converged"] = report.grid.any_converged;
    g["total_grad_evals"] = report.grid.total_grad_evals;
    auto& cells = g["cells"] = nlohmann::json::array();
    for (const auto& c : report.grid.cells)
      cells.push_back({{"eps", c.eps}, {"L", c.L}, {"ess_mean", c.ess_mean}});
    j["grid"] = std::move(g);
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed while writing " + path);
}

void emit_report(const ExperimentConfig& cfg, const ExperimentReport& report) {
  write_summary_json(cfg.out_path + ".summary.json", report);
  for (std::size_t i = 0; i < report.per_seed.size(); ++i) {
    write_convergence_csv(cfg.out_path + ".seed" + std::to_string(i) + ".csv",
                          report.per_seed[i].result.rows);
  }
}

}  // namespace micromc
