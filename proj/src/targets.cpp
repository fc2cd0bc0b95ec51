#include "micromc/targets.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "micromc/numeric.hpp"

namespace micromc {

namespace {

void check_dim(const Vector& x, Index d, const char* who) {
  if (x.size() != d) {
    throw std::invalid_argument(std::string(who) + ": point has dimension " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(d));
  }
}

}  // namespace

TargetDistribution make_standard_gaussian(Index d) {
  if (d < 1) throw std::invalid_argument("standard_gaussian: d must be >= 1");
  TargetDistribution t;
  t.name = "gaussian";
  t.d = d;
  t.eval = [d](const Vector& x, double& L, Vector& grad) {
    check_dim(x, d, "gaussian");
    L = 0.5 * x.squaredNorm();
    grad = x;
  };
  t.truth_second_moments = Vector::Ones(d);
  return t;
}

TargetDistribution make_ill_conditioned_gaussian(Index d, double kappa,
                                                 std::uint64_t seed,
                                                 Spacing spacing) {
  if (d < 1) throw std::invalid_argument("icg: d must be >= 1");
  if (kappa < 1.0) throw std::invalid_argument("icg: kappa must be >= 1");
  if (kappa == 1.0) {
    TargetDistribution t = make_standard_gaussian(d);
    t.name = "icg";
    return t;
  }

  Vector lambda(d);
  for (Index i = 0; i < d; ++i) {
    const double f = d > 1 ? static_cast<double>(i) / static_cast<double>(d - 1) : 0.5;
    if (spacing == Spacing::Log) {
      lambda[i] = std::exp(std::log(kappa) * (f - 0.5));
    } else {
      lambda[i] = 1.0 / kappa + f * (1.0 - 1.0 / kappa);
    }
  }

  TargetDistribution t;
  t.name = "icg";
  t.d = d;
  t.truth_second_moments = lambda;

  if (spacing == Spacing::Linear) {
    // Axis-aligned; the precision matrix is diagonal.
    auto inv_lambda = std::make_shared<Vector>(lambda.cwiseInverse());
    t.eval = [d, inv_lambda](const Vector& x, double& L, Vector& grad) {
      check_dim(x, d, "icg");
      grad = inv_lambda->cwiseProduct(x);
      L = 0.5 * x.dot(grad);
    };
    return t;
  }

  // Seeded random rotation: QR of a Gaussian matrix, with column signs fixed
  // so the factorization is canonical.
  RngStream rng(seed, /*stream=*/0x1c6u);
  Matrix G(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix R = qr.householderQ();
  const Matrix upper = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j)
    if (upper(j, j) < 0) R.col(j) *= -1.0;

  auto rotation = std::make_shared<Matrix>(R);
  auto precision =
      std::make_shared<Matrix>(R * lambda.cwiseInverse().asDiagonal() * R.transpose());

  t.eval = [d, precision](const Vector& x, double& L, Vector& grad) {
    check_dim(x, d, "icg");
    grad.noalias() = (*precision) * x;
    L = 0.5 * x.dot(grad);
  };
  t.eval_transform = [rotation](const Vector& x) -> Vector {
    return rotation->transpose() * x;
  };
  return t;
}

TargetDistribution make_bimodal(Index d) {
  if (d < 1) throw std::invalid_argument("bimodal: d must be >= 1");
  constexpr double kWeightA = 0.8;
  constexpr double kWeightB = 0.2;
  constexpr double kSeparation = 8.0;

  TargetDistribution t;
  t.name = "bimodal";
  t.d = d;
  t.eval = [d](const Vector& x, double& L, Vector& grad) {
    check_dim(x, d, "bimodal");
    const double x1 = x[0];
    const double quad = x.squaredNorm();
    // Mode-local exponents differ only through the first coordinate.
    const double log_a = std::log(kWeightA) - 0.5 * quad;
    const double log_b =
        std::log(kWeightB) - 0.5 * (quad - x1 * x1 + (x1 - kSeparation) * (x1 - kSeparation));
    L = -log_add_exp(log_a, log_b);
    const double w_b = 1.0 / (1.0 + std::exp(log_a - log_b));
    grad = x;
    grad[0] -= w_b * kSeparation;
  };
  Vector truth = Vector::Ones(d);
  truth[0] = kWeightB * (kSeparation * kSeparation + 1.0) + kWeightA;  // 13.8
  t.truth_second_moments = truth;
  return t;
}

TargetDistribution make_rosenbrock(Index d, double Q) {
  if (d < 2 || d % 2 != 0)
    throw std::invalid_argument("rosenbrock: d must be even and >= 2");
  if (!(Q > 0.0)) throw std::invalid_argument("rosenbrock: Q must be > 0");
  const Index half = d / 2;

  TargetDistribution t;
  t.name = "rosenbrock";
  t.d = d;
  t.eval = [d, half, Q](const Vector& x, double& L, Vector& grad) {
    check_dim(x, d, "rosenbrock");
    L = 0.0;
    for (Index i = 0; i < half; ++i) {
      const double a = x[i];
      const double b = x[half + i];
      const double r = b - a * a;
      L += 0.5 * (a - 1.0) * (a - 1.0) + 0.5 * r * r / Q;
      grad[i] = (a - 1.0) - 2.0 * a * r / Q;
      grad[half + i] = r / Q;
    }
  };
  Vector truth(d);
  truth.head(half).setConstant(2.0);
  truth.tail(half).setConstant(10.0 + Q);
  t.truth_second_moments = truth;
  // x ~ N(1, 1) and y | x ~ N(x^2, Q), so E[x^2] = 2 and
  // E[y^2] = E[x^4] + Q = 10 + Q.
  return t;
}

TargetDistribution make_funnel(Index d) {
  if (d < 2) throw std::invalid_argument("funnel: d must be >= 2");
  TargetDistribution t;
  t.name = "funnel";
  t.d = d;
  t.eval = [d](const Vector& x, double& L, Vector& grad) {
    check_dim(x, d, "funnel");
    const double theta = x[d - 1];
    const double inv_scale = std::exp(-theta);
    const double zsq = x.head(d - 1).squaredNorm();
    L = theta * theta / 18.0 + 0.5 * zsq * inv_scale +
        0.5 * static_cast<double>(d - 1) * theta;
    grad.head(d - 1) = inv_scale * x.head(d - 1);
    grad[d - 1] =
        theta / 9.0 - 0.5 * zsq * inv_scale + 0.5 * static_cast<double>(d - 1);
  };
  t.eval_transform = [d](const Vector& x) -> Vector {
    Vector y(d);
    const double theta = x[d - 1];
    y.head(d - 1) = std::exp(-0.5 * theta) * x.head(d - 1);
    y[d - 1] = theta / 3.0;
    return y;
  };
  t.truth_second_moments = Vector::Ones(d);
  return t;
}

double cauchy_entropy_truth() { return std::log(4.0 * M_PI); }

TargetDistribution make_cauchy(Index d) {
  if (d < 1) throw std::invalid_argument("cauchy: d must be >= 1");
  TargetDistribution t;
  t.name = "cauchy";
  t.d = d;
  t.eval = [d](const Vector& x, double& L, Vector& grad) {
    check_dim(x, d, "cauchy");
    const Eigen::ArrayXd one_sq = 1.0 + x.array().square();
    L = static_cast<double>(d) * std::log(M_PI) + one_sq.log().sum();
    grad.array() = 2.0 * x.array() / one_sq;
  };
  t.entropy_observable = [d](const Vector& x, Vector& out) {
    check_dim(x, d, "cauchy");
    out.array() = std::log(M_PI) + (1.0 + x.array().square()).log();
  };
  t.entropy_truth = cauchy_entropy_truth();
  return t;
}

TargetDistribution make_stochastic_volatility(const ReturnsSeries& returns) {
  const Index n = returns.size();
  if (n < 2) throw std::invalid_argument("sv: need at least 2 returns");
  auto r_sq = std::make_shared<Vector>(returns.values.cwiseProduct(returns.values));
  constexpr double kNuScale = 10.0;
  constexpr double kSigmaScale = 0.02;
  const Index d = n + 2;

  TargetDistribution t;
  t.name = "sv";
  t.d = d;
  t.eval = [n, d, r_sq](const Vector& p, double& L, Vector& grad) {
    check_dim(p, d, "sv");
    const double nu_t = p[n];
    const double sg_t = p[n + 1];
    const double nu = kNuScale * std::exp(nu_t);
    const double sigma = kSigmaScale * std::exp(sg_t);
    const double inv_var = 1.0 / (sigma * sigma);

    // Per-evaluation constants of the Student-t negative log density.
    const double c_nu = -std::lgamma(0.5 * (nu + 1.0)) + std::lgamma(0.5 * nu) +
                        0.5 * std::log(nu * M_PI);
    const double dig = 0.5 * digamma(0.5 * (nu + 1.0)) - 0.5 * digamma(0.5 * nu);

    // Likelihood terms, vectorized over the series: with x_i = r_i e^{-s_i}
    // and t_i = x_i^2 / nu, each return contributes
    //   c_nu + (nu+1)/2 log(1 + t_i) + s_i.
    const auto s = p.head(n).array();
    const Eigen::ArrayXd tt = r_sq->array() * (-2.0 * s).exp() / nu;
    const Eigen::ArrayXd tail = (1.0 + tt).log();
    const Eigen::ArrayXd frac = tt / (1.0 + tt);  // x^2 / (nu + x^2)
    const double sum_tail = tail.sum();

    L = (std::exp(nu_t) - nu_t) + (std::exp(sg_t) - sg_t) +
        static_cast<double>(n) * (std::log(sigma) + c_nu) +
        0.5 * (nu + 1.0) * sum_tail + s.sum();
    grad.head(n).array() = 1.0 - (nu + 1.0) * frac;
    // d(-log t)/dnu summed over observations.
    const double dL_dnu = static_cast<double>(n) * (0.5 / nu - dig) + 0.5 * sum_tail -
                          0.5 * (nu + 1.0) / nu * frac.sum();

    // Gaussian random walk prior on the volatilities, anchored at s_0 = 0.
    double walk_sq = 0.0;
    double prev = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double diff = p[i] - prev;
      L += 0.5 * diff * diff * inv_var;
      grad[i] += diff * inv_var;
      if (i + 1 < n) grad[i] -= (p[i + 1] - p[i]) * inv_var;
      walk_sq += diff * diff;
      prev = p[i];
    }
    grad[n] = nu * dL_dnu + std::exp(nu_t) - 1.0;
    grad[n + 1] = -walk_sq * inv_var + static_cast<double>(n) + std::exp(sg_t) - 1.0;
  };
  t.initial_draw = [n, d](RngStream& rng) -> Vector {
    Vector p(d);
    const double nu_t = std::log(-std::log(rng.uniform() + 1e-300));
    const double sg_t = std::log(-std::log(rng.uniform() + 1e-300));
    const double sigma = kSigmaScale * std::exp(sg_t);
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      s += sigma * rng.normal();
      p[i] = s;
    }
    p[n] = nu_t;
    p[n + 1] = sg_t;
    return p;
  };
  return t;
}

ReturnsSeries load_returns_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("returns csv: cannot open " + path);
  std::vector<double> values;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Trim whitespace and an optional trailing comma.
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r,");
    std::string cell = line.substr(begin, end - begin + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      values.push_back(v);
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header
      throw std::runtime_error("returns csv: bad row " + std::to_string(line_no) +
                               " in " + path);
    }
  }
  if (values.empty()) throw std::runtime_error("returns csv: no data in " + path);
  ReturnsSeries series;
  series.values = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
  return series;
}

}  // namespace micromc
