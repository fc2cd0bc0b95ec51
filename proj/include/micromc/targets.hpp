#pragma once

#include <cstdint>
#include <string>

#include "micromc/target.hpp"

namespace micromc {

/// Eigenvalue layout of the ill-conditioned Gaussian covariance.
enum class Spacing { Log, Linear };

/// Standard Gaussian N(0, I_d), L = |x|^2 / 2.
TargetDistribution make_standard_gaussian(Index d);

/// Zero-mean Gaussian whose covariance eigenvalues span condition number
/// kappa.  Log spacing places them in [1/sqrt(kappa), sqrt(kappa)] and applies
/// a seeded random rotation; linear spacing places them in [1/kappa, 1] on the
/// coordinate axes.  Moments are judged in the eigenbasis, where the truth per
/// coordinate is the eigenvalue itself.  Requires kappa >= 1.
TargetDistribution make_ill_conditioned_gaussian(Index d, double kappa,
                                                 std::uint64_t seed = 0,
                                                 Spacing spacing = Spacing::Log);

/// Mixture 0.8 N(0, I) + 0.2 N(8 e_1, I); E[x_1] = 1.6, E[x_1^2] = 13.8.
TargetDistribution make_bimodal(Index d);

/// d/2 independent Rosenbrock pairs with curvature parameter Q, parameters
/// laid out as (x_1..x_{d/2}, y_1..y_{d/2}).  E[x^2] = 2, E[y^2] = 10 + Q.
/// Requires even d >= 2 and Q > 0.
TargetDistribution make_rosenbrock(Index d, double Q = 0.1);

/// Neal's funnel: theta ~ N(0, 9), z_i | theta ~ N(0, e^theta).  Moments are
/// judged on the Gaussianized variables (theta/3, z e^{-theta/2}).  Requires
/// d >= 2.
TargetDistribution make_funnel(Index d);

/// Product of d standard Cauchy marginals.  Moments do not exist; convergence
/// is judged through the per-coordinate entropy observable
/// log pi + log(1 + x_i^2), whose expectation is log(4 pi).
TargetDistribution make_cauchy(Index d);

/// Student-t stochastic volatility posterior over (s_1..s_N, nu~, sigma~)
/// given a series of N returns; d = N + 2.
TargetDistribution make_stochastic_volatility(const ReturnsSeries& returns);

/// Reads one return per line; a non-numeric first line is treated as a
/// header.  Throws std::runtime_error on missing file, empty series, or an
/// unparseable row.
ReturnsSeries load_returns_csv(const std::string& path);

/// Expected value of the Cauchy entropy observable, log(4 pi).
double cauchy_entropy_truth();

}  // namespace micromc
