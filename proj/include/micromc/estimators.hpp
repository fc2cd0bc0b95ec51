#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "micromc/types.hpp"

namespace micromc {

/// Streaming weighted first and second moments per coordinate.
///
/// Means are stored directly (never raw sums), so accumulating 1e6 points is
/// as stable as 1e2.  Weights enter only through ratios; rescaling the total
/// weight lets a caller move every past sample onto a new weight reference
/// without touching the means.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(Index d)
      : m1_(Vector::Zero(d)), m2_(Vector::Zero(d)) {}

  void accumulate(const Vector& x, double w) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("MomentAccumulator: weight must be finite and > 0");
    if (x.size() != m1_.size())
      throw std::invalid_argument("MomentAccumulator: dimension mismatch");
    weight_ += w;
    const double c = w / weight_;
    m1_.array() += c * (x.array() - m1_.array());
    m2_.array() += c * (x.array().square() - m2_.array());
    ++count_;
  }

  /// Multiplies the accumulated weight, leaving the means untouched.
  void rescale_weight(double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor))
      throw std::invalid_argument("MomentAccumulator: rescale factor must be finite and > 0");
    weight_ *= factor;
  }

  /// Combines with another accumulator over the same space; the result equals
  /// accumulating the union of both streams in any order.
  void merge(const MomentAccumulator& other) {
    if (other.m1_.size() != m1_.size())
      throw std::invalid_argument("MomentAccumulator: merge dimension mismatch");
    if (other.weight_ == 0.0) return;
    const double total = weight_ + other.weight_;
    const double c = other.weight_ / total;
    m1_.array() += c * (other.m1_.array() - m1_.array());
    m2_.array() += c * (other.m2_.array() - m2_.array());
    weight_ = total;
    count_ += other.count_;
  }

  Index dim() const { return m1_.size(); }
  double weight() const { return weight_; }
  long long count() const { return count_; }
  const Vector& mean() const { return m1_; }
  const Vector& second_moment() const { return m2_; }

 private:
  double weight_ = 0.0;
  long long count_ = 0;
  Vector m1_;
  Vector m2_;
};

/// Relative second-moment error decomposition over coordinates:
/// z_i = (m2_i - truth_i) / truth_i, b1 = mean(z), sigma^2 = var(z), and
/// b2^2 = b1^2 + sigma^2 is the full-squared bias used as the convergence
/// criterion.
struct BiasSummary {
  double b1 = 0.0;
  double sigma = 0.0;
  double b2 = 0.0;
};

BiasSummary second_moment_bias(const Vector& m2, const Vector& truth);

inline BiasSummary second_moment_bias(const MomentAccumulator& acc, const Vector& truth) {
  return second_moment_bias(acc.second_moment(), truth);
}

/// Squared bias of a per-coordinate observable with a known expectation:
/// mean over coordinates of (mean_i - truth)^2.
double entropy_bias_sq(const Vector& observable_means, double truth);

/// Effective sample size per coordinate from Geyer's initial positive
/// sequence estimator; entries are NaN where the chain is constant or the
/// estimate is undefined.  Rows of `samples` are consecutive chain states.
/// Requires at least 50 rows.
Vector autocorr_neff(const Matrix& samples);

/// One point of a convergence curve: squared-bias-style metric against the
/// cumulative gradient evaluation count.
struct CurvePoint {
  double grad_evals = 0.0;
  double value = 0.0;
};

/// Number of gradient evaluations at which the curve first crosses below the
/// threshold, log-log interpolated between neighboring points; +inf when the
/// curve never crosses.  Points must be ordered by grad_evals.
double crossing_point(const std::vector<CurvePoint>& curve, double threshold);

/// ESS = 200 / n at the first crossing of `threshold` (default matches the
/// b2 = 0.1 convergence convention); 0 when the curve never crosses.
double ess_from_curve(const std::vector<CurvePoint>& curve, double threshold = 0.1);

/// Scalar Welford accumulator for means and variances of step series.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  long long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_) : 0.0; }

 private:
  long long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace micromc
