#include "micromc/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace micromc {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::MCHMC: return "mchmc";
    case Algorithm::MCLMC: return "mclmc";
    case Algorithm::Q2: return "q2";
    case Algorithm::UHMC: return "uhmc";
  }
  return "?";
}

std::string to_string(Integrator i) {
  return i == Integrator::MinimalNorm ? "mn" : "lf";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "mchmc") return Algorithm::MCHMC;
  if (s == "mclmc") return Algorithm::MCLMC;
  if (s == "q2") return Algorithm::Q2;
  if (s == "uhmc") return Algorithm::UHMC;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

Integrator parse_integrator(const std::string& s) {
  if (s == "lf") return Integrator::Leapfrog;
  if (s == "mn") return Integrator::MinimalNorm;
  throw std::invalid_argument("unknown integrator '" + s + "'");
}

MomentAccumulator pool_moments(const std::vector<MomentSnapshot>& parts) {
  if (parts.empty()) throw std::invalid_argument("pool_moments: no parts");
  const Index d = parts.front().moments.dim();
  double common = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    if (p.moments.dim() != d) throw std::invalid_argument("pool_moments: dimension mismatch");
    if (p.moments.weight() > 0.0) common = std::min(common, p.log_ref);
  }
  MomentAccumulator out(d);
  for (const auto& p : parts) {
    if (p.moments.weight() <= 0.0) continue;
    const double factor = std::exp((common - p.log_ref) / static_cast<double>(d));
    if (!(factor > 0.0)) continue;  // weights vanish on the common scale
    MomentAccumulator part = p.moments;
    part.rescale_weight(factor);
    out.merge(part);
  }
  return out;
}

double convergence_threshold(const TargetDistribution& target) {
  if (target.has_truth()) return 0.1;
  // 200 effective samples of the entropy observable, Var = pi^2/3 per
  // coordinate, correspond to a squared bias of 0.0165.
  if (target.has_entropy_metric()) return std::sqrt(0.0165);
  return std::numeric_limits<double>::quiet_NaN();
}

namespace detail {

Q0Kernel::Q0Kernel(const TargetDistribution& target, Algorithm alg, Integrator integ,
                   double eps, double L)
    : target_(&target), alg_(alg), integ_(integ), eps_(eps) {
  if (alg != Algorithm::MCHMC && alg != Algorithm::MCLMC)
    throw std::invalid_argument("Q0Kernel: microcanonical algorithms only");
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("Q0Kernel: eps must be positive and finite");
  if (!(L > 0.0)) throw std::invalid_argument("Q0Kernel: L must be positive");
  if (alg == Algorithm::MCLMC) {
    nu_ = nu_coefficient(eps, L, target.d);
  } else if (!std::isinf(L)) {
    bounce_every_ = std::max<long long>(1, std::llround(L / eps));
  }
}

void Q0Kernel::iterate(SamplerState& s, long long n, RngStream& rng) {
  if (bounce_every_ > 0 && n % bounce_every_ == 0) full_bounce(s, rng);
  const bool ok = integ_ == Integrator::Leapfrog
                      ? leapfrog_step(s, eps_, *target_, grad_evals)
                      : minimal_norm_step(s, eps_, *target_, grad_evals);
  if (!ok) {
    ++divergences;
    full_bounce(s, rng);
    return;
  }
  if (nu_ > 0.0) partial_refresh(s, nu_, rng);
}

}  // namespace detail

namespace {

bool finite_eval(double L, const Vector& g) {
  return std::isfinite(L) && g.allFinite();
}

/// Owns accumulators, checkpoint rows, and the ECW weight reference shared by
/// the per-algorithm run loops.
class Recorder {
 public:
  Recorder(const TargetDistribution& t, const SamplerConfig& cfg)
      : target_(&t),
        cfg_(&cfg),
        moments_(t.d),
        entropy_(t.has_entropy_metric() ? t.d : 0),
        obs_buf_(t.has_entropy_metric() ? t.d : 0),
        next_checkpoint_(cfg.checkpoints.start) {}

  /// Records a point whose microcanonical weight is e^{-(L - ref)/d}; the
  /// reference tracks the running minimum of L so weights stay in (0, 1].
  void add_weighted(const Vector& x, double L) {
    const double d = static_cast<double>(target_->d);
    if (first_) {
      log_ref_ = L;
      first_ = false;
    } else if (L < log_ref_) {
      const double factor = std::exp((L - log_ref_) / d);
      if (factor > 0.0) {
        moments_.rescale_weight(factor);
        if (entropy_.dim() > 0) entropy_.rescale_weight(factor);
      } else {
        // Past weights underflow on the new reference; restart the stream.
        moments_ = MomentAccumulator(moments_.dim());
        if (entropy_.dim() > 0) entropy_ = MomentAccumulator(entropy_.dim());
      }
      log_ref_ = L;
    }
    add_with_weight(x, sample_weight(L, log_ref_, target_->d));
  }

  void add_unit(const Vector& x) {
    first_ = false;
    add_with_weight(x, 1.0);
  }

  void snapshot_if_due(long long step) {
    if (snap_idx_ < cfg_->snapshot_steps.size() &&
        step == cfg_->snapshot_steps[snap_idx_]) {
      snapshots_.push_back({step, moments_, log_ref_});
      ++snap_idx_;
    }
  }

  /// Appends a row when the gradient count has reached the schedule (or when
  /// forced).  Returns the b2 value of the row just written, NaN otherwise.
  double checkpoint_if_due(long long step, long long grad_evals, long long divergences,
                           const RunningStat& energy, bool force) {
    const double ge = static_cast<double>(grad_evals);
    if (!force && ge < next_checkpoint_) return std::numeric_limits<double>::quiet_NaN();
    while (next_checkpoint_ <= ge) next_checkpoint_ *= cfg_->checkpoints.ratio;

    ConvergenceRow row;
    row.step = step;
    row.grad_evals = ge;
    row.divergences = divergences;
    row.varE_per_d = energy.variance() / static_cast<double>(target_->d);
    fill_bias(row);
    rows_.push_back(row);
    return row.b2;
  }

  MomentSnapshot final_moments(long long step) const { return {step, moments_, log_ref_}; }
  MomentSnapshot final_entropy(long long step) const { return {step, entropy_, log_ref_}; }
  std::vector<MomentSnapshot>&& take_snapshots() { return std::move(snapshots_); }
  std::vector<ConvergenceRow>&& take_rows() { return std::move(rows_); }

 private:
  void add_with_weight(const Vector& x, double w) {
    moments_.accumulate(target_->transform(x), w);
    if (entropy_.dim() > 0) {
      target_->entropy_observable(x, obs_buf_);
      entropy_.accumulate(obs_buf_, w);
    }
  }

  void fill_bias(ConvergenceRow& row) const {
    if (target_->has_truth()) {
      const BiasSummary b = second_moment_bias(moments_, target_->truth_second_moments);
      row.b1 = b.b1;
      row.sigma = b.sigma;
      row.b2 = b.b2;
    } else if (entropy_.dim() > 0) {
      const Vector z = entropy_.mean().array() - target_->entropy_truth;
      row.b1 = z.mean();
      const double b2sq = z.squaredNorm() / static_cast<double>(z.size());
      row.b2 = std::sqrt(b2sq);
      row.sigma = std::sqrt(std::max(0.0, b2sq - row.b1 * row.b1));
    } else {
      row.b1 = row.sigma = row.b2 = std::numeric_limits<double>::quiet_NaN();
    }
  }

  const TargetDistribution* target_;
  const SamplerConfig* cfg_;
  MomentAccumulator moments_;
  MomentAccumulator entropy_;
  Vector obs_buf_;
  std::vector<MomentSnapshot> snapshots_;
  std::vector<ConvergenceRow> rows_;
  double log_ref_ = 0.0;
  bool first_ = true;
  double next_checkpoint_;
  std::size_t snap_idx_ = 0;
};

void validate_config(const TargetDistribution& t, const SamplerConfig& cfg) {
  if (t.d < 1) throw std::invalid_argument("run_chain: target dimension must be >= 1");
  if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps))
    throw std::invalid_argument("run_chain: eps must be positive and finite");
  if (!(cfg.L > 0.0)) throw std::invalid_argument("run_chain: L must be positive");
  if (cfg.steps < 1) throw std::invalid_argument("run_chain: steps must be >= 1");
  if (!std::is_sorted(cfg.snapshot_steps.begin(), cfg.snapshot_steps.end()))
    throw std::invalid_argument("run_chain: snapshot_steps must be sorted");
}

Vector initial_point(const TargetDistribution& t, RngStream& rng) {
  return t.initial_draw ? t.initial_draw(rng) : rng.normal_vector(t.d);
}

ChainResult assemble(const TargetDistribution& t, const SamplerConfig& cfg, Recorder& rec,
                     long long steps_run, long long grad_evals, long long divergences,
                     const RunningStat& energy, const Vector& x, Matrix&& samples) {
  ChainResult out;
  out.moments = rec.final_moments(steps_run);
  if (t.has_entropy_metric()) out.entropy_moments = rec.final_entropy(steps_run);
  out.snapshots = rec.take_snapshots();
  out.rows = rec.take_rows();
  out.steps_run = steps_run;
  out.grad_evals = grad_evals;
  out.divergences = divergences;
  out.divergence_flag = divergences * 10 > steps_run;
  out.energy_mean_dev = energy.mean();
  out.energy_var_per_d = energy.variance() / static_cast<double>(t.d);
  out.final_x = x;
  out.samples = std::move(samples);
  out.eps = cfg.eps;
  out.L = cfg.L;
  return out;
}

ChainResult run_q0(const TargetDistribution& t, const SamplerConfig& cfg) {
  RngStream rng(cfg.seed, cfg.stream);
  detail::Q0Kernel kernel(t, cfg.algorithm, cfg.integrator, cfg.eps, cfg.L);

  const Vector x0 = initial_point(t, rng);
  SamplerState s = make_state(t, x0, rng.unit_vector(t.d), kernel.grad_evals);
  if (!finite_eval(s.L_x, s.g_x))
    throw std::runtime_error("run_chain: target is not finite at the initial point");

  Recorder rec(t, cfg);
  RunningStat energy;
  const double E0 = s.L_x;  // log_r starts at 0
  rec.add_weighted(s.x, s.L_x);

  Matrix samples;
  if (cfg.record_samples) {
    samples.resize(cfg.steps + 1, t.d);
    samples.row(0) = s.x;
  }

  long long n = 0;
  for (; n < cfg.steps; ++n) {
    kernel.iterate(s, n, rng);
    rec.add_weighted(s.x, s.L_x);
    energy.add(energy_deviation(s, E0));
    if (cfg.record_samples) samples.row(n + 1) = s.x;
    rec.snapshot_if_due(n + 1);
    const bool last = n + 1 == cfg.steps;
    const double b2 =
        rec.checkpoint_if_due(n + 1, kernel.grad_evals, kernel.divergences, energy, last);
    if (cfg.stop_below_b2 > 0.0 && b2 <= cfg.stop_below_b2) {
      ++n;
      break;
    }
  }
  if (cfg.record_samples && n < cfg.steps) samples.conservativeResize(n + 1, t.d);
  return assemble(t, cfg, rec, n, kernel.grad_evals, kernel.divergences, energy, s.x,
                  std::move(samples));
}

ChainResult run_q2_impl(const TargetDistribution& t, const SamplerConfig& cfg) {
  if (t.d <= 2)
    throw std::invalid_argument("run_chain: the q=2 variant requires d > 2");
  if (cfg.integrator != Integrator::Leapfrog)
    throw std::invalid_argument("run_chain: the q=2 variant integrates with leapfrog only");
  RngStream rng(cfg.seed, cfg.stream);
  const double dm2 = static_cast<double>(t.d - 2);
  long long grad_evals = 0;
  long long divergences = 0;
  const long long bounce_every =
      std::isinf(cfg.L) ? 0 : std::max<long long>(1, std::llround(cfg.L / cfg.eps));

  Vector x = initial_point(t, rng);
  double L;
  Vector g(t.d);
  t.eval(x, L, g);
  ++grad_evals;
  if (!finite_eval(L, g))
    throw std::runtime_error("run_chain: target is not finite at the initial point");

  // Zero total energy: |p| = e^{-L/(d-2)} makes p^2/2 cancel V = -e^{-2L/(d-2)}/2.
  Vector p = std::exp(-L / dm2) * rng.unit_vector(t.d);
  auto potential = [&](double Lx) { return -0.5 * std::exp(-2.0 * Lx / dm2); };
  auto force_scale = [&](double Lx) { return std::exp(-2.0 * Lx / dm2) / dm2; };
  const double E_seg = 0.5 * p.squaredNorm() + potential(L);

  Recorder rec(t, cfg);
  RunningStat energy;
  rec.add_unit(x);

  Matrix samples;
  if (cfg.record_samples) {
    samples.resize(cfg.steps + 1, t.d);
    samples.row(0) = x;
  }

  Vector x_save(t.d), p_save(t.d);
  long long n = 0;
  for (; n < cfg.steps; ++n) {
    if (bounce_every > 0 && n % bounce_every == 0) p = p.norm() * rng.unit_vector(t.d);
    x_save = x;
    p_save = p;
    bool ok = true;
    double scale = force_scale(L);
    if (!std::isfinite(scale)) {
      ok = false;
    } else {
      p -= (0.5 * cfg.eps * scale) * g;
      x += cfg.eps * p;
      t.eval(x, L, g);
      ++grad_evals;
      scale = force_scale(L);
      ok = finite_eval(L, g) && std::isfinite(scale) && p.allFinite();
      if (ok) p -= (0.5 * cfg.eps * scale) * g;
    }
    if (!ok) {
      ++divergences;
      x = x_save;
      t.eval(x, L, g);
      ++grad_evals;
      p = p_save.norm() * rng.unit_vector(t.d);
    }
    rec.add_unit(x);
    energy.add(0.5 * p.squaredNorm() + potential(L) - E_seg);
    if (cfg.record_samples) samples.row(n + 1) = x;
    rec.snapshot_if_due(n + 1);
    const bool last = n + 1 == cfg.steps;
    const double b2 = rec.checkpoint_if_due(n + 1, grad_evals, divergences, energy, last);
    if (cfg.stop_below_b2 > 0.0 && b2 <= cfg.stop_below_b2) {
      ++n;
      break;
    }
  }
  if (cfg.record_samples && n < cfg.steps) samples.conservativeResize(n + 1, t.d);
  return assemble(t, cfg, rec, n, grad_evals, divergences, energy, x, std::move(samples));
}

ChainResult run_uhmc_impl(const TargetDistribution& t, const SamplerConfig& cfg) {
  if (cfg.integrator != Integrator::Leapfrog)
    throw std::invalid_argument("run_chain: uhmc integrates with leapfrog only");
  RngStream rng(cfg.seed, cfg.stream);
  long long grad_evals = 0;
  long long divergences = 0;
  const long long resample_every =
      std::isinf(cfg.L) ? 0 : std::max<long long>(1, std::llround(cfg.L / cfg.eps));

  Vector x = initial_point(t, rng);
  double L;
  Vector g(t.d);
  t.eval(x, L, g);
  ++grad_evals;
  if (!finite_eval(L, g))
    throw std::runtime_error("run_chain: target is not finite at the initial point");

  Vector p = rng.normal_vector(t.d);
  double E_seg = 0.5 * p.squaredNorm() + L;

  Recorder rec(t, cfg);
  RunningStat energy;
  rec.add_unit(x);

  Matrix samples;
  if (cfg.record_samples) {
    samples.resize(cfg.steps + 1, t.d);
    samples.row(0) = x;
  }

  long long n = 0;
  for (; n < cfg.steps; ++n) {
    if (resample_every > 0 && n % resample_every == 0) {
      p = rng.normal_vector(t.d);
      E_seg = 0.5 * p.squaredNorm() + L;
    }
    p -= (0.5 * cfg.eps) * g;
    x += cfg.eps * p;
    t.eval(x, L, g);
    ++grad_evals;
    if (finite_eval(L, g) && p.allFinite()) {
      p -= (0.5 * cfg.eps) * g;
    } else {
      ++divergences;
      x -= cfg.eps * p;  // p unchanged since the drift
      t.eval(x, L, g);
      ++grad_evals;
      p = rng.normal_vector(t.d);
      E_seg = 0.5 * p.squaredNorm() + L;
    }
    rec.add_unit(x);
    energy.add(0.5 * p.squaredNorm() + L - E_seg);
    if (cfg.record_samples) samples.row(n + 1) = x;
    rec.snapshot_if_due(n + 1);
    const bool last = n + 1 == cfg.steps;
    const double b2 = rec.checkpoint_if_due(n + 1, grad_evals, divergences, energy, last);
    if (cfg.stop_below_b2 > 0.0 && b2 <= cfg.stop_below_b2) {
      ++n;
      break;
    }
  }
  if (cfg.record_samples && n < cfg.steps) samples.conservativeResize(n + 1, t.d);
  return assemble(t, cfg, rec, n, grad_evals, divergences, energy, x, std::move(samples));
}

}  // namespace

ChainResult run_chain(const TargetDistribution& target, const SamplerConfig& cfg) {
  validate_config(target, cfg);
  switch (cfg.algorithm) {
    case Algorithm::MCHMC:
    case Algorithm::MCLMC:
      return run_q0(target, cfg);
    case Algorithm::Q2:
      return run_q2_impl(target, cfg);
    case Algorithm::UHMC:
      return run_uhmc_impl(target, cfg);
  }
  throw std::logic_error("run_chain: unhandled algorithm");
}

namespace {
ChainResult run_checked(const TargetDistribution& t, const SamplerConfig& cfg, Algorithm want) {
  if (cfg.algorithm != want)
    throw std::invalid_argument("algorithm mismatch: config says " + to_string(cfg.algorithm));
  return run_chain(t, cfg);
}
}  // namespace

ChainResult run_mchmc(const TargetDistribution& t, const SamplerConfig& cfg) {
  return run_checked(t, cfg, Algorithm::MCHMC);
}
ChainResult run_mclmc(const TargetDistribution& t, const SamplerConfig& cfg) {
  return run_checked(t, cfg, Algorithm::MCLMC);
}
ChainResult run_q2(const TargetDistribution& t, const SamplerConfig& cfg) {
  return run_checked(t, cfg, Algorithm::Q2);
}
ChainResult run_uhmc(const TargetDistribution& t, const SamplerConfig& cfg) {
  return run_checked(t, cfg, Algorithm::UHMC);
}

}  // namespace micromc
