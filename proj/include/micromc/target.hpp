#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "micromc/rng.hpp"
#include "micromc/types.hpp"

namespace micromc {

/// A differentiable unnormalized target, handled through its negative log
/// density L(x) = -log p(x) + const and gradient.
///
/// Evaluation closures must be stateless apart from captured constants, so a
/// single instance can be shared by concurrently running chains.
struct TargetDistribution {
  std::string name;
  Index d = 0;

  /// Writes L(x) and its gradient; `grad` is preallocated with size d and the
  /// implementation must not resize it.
  std::function<void(const Vector& x, double& L, Vector& grad)> eval;

  /// Optional map into the coordinates in which moments are judged (for
  /// example the eigenbasis of a correlated Gaussian).  Empty means identity.
  std::function<Vector(const Vector& x)> eval_transform;

  /// Optional draw from the model's own initial distribution.  Samplers fall
  /// back to N(0, I) when unset.
  std::function<Vector(RngStream& rng)> initial_draw;

  /// Per-coordinate reference values of E[y_i^2] in evaluation coordinates.
  /// Empty when no closed form is available.
  Vector truth_second_moments;

  /// Optional per-coordinate observable whose expectation has a known value
  /// (used when second moments do not exist).  Writes d entries into `out`.
  std::function<void(const Vector& x, Vector& out)> entropy_observable;

  /// Expected value of each entropy_observable coordinate under the target.
  double entropy_truth = std::numeric_limits<double>::quiet_NaN();

  bool has_truth() const { return truth_second_moments.size() > 0; }
  bool has_entropy_metric() const { return static_cast<bool>(entropy_observable); }

  /// L and gradient in evaluation coordinates are those of the raw chain; the
  /// transform applies only to recorded samples.
  Vector transform(const Vector& x) const {
    return eval_transform ? eval_transform(x) : x;
  }
};

/// Daily log-return series consumed by the stochastic volatility target.
struct ReturnsSeries {
  Vector values;
  Index size() const { return values.size(); }
};

}  // namespace micromc
