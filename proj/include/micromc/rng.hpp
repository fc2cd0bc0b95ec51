#pragma once

#include <cstdint>
#include <cmath>
#include <random>

#include "micromc/types.hpp"

namespace micromc {

/// Deterministic random stream built on mt19937_64.
///
/// Uniform and normal variates are generated with fixed arithmetic (53-bit
/// uniforms, Marsaglia polar normals) rather than std distributions, whose
/// output is implementation defined.  Two streams with the same (seed,
/// stream) pair produce identical sequences on any platform; distinct stream
/// ids give statistically independent substreams of one experiment seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    gen_.seed(seq);
  }

  /// Uniform draw in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw (polar method with cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Vector of independent standard normals.
  Vector normal_vector(Index d) {
    Vector z(d);
    for (Index i = 0; i < d; ++i) z[i] = normal();
    return z;
  }

  /// Uniform draw from the unit sphere in d dimensions.
  Vector unit_vector(Index d) {
    Vector z = normal_vector(d);
    double n = z.norm();
    while (n == 0.0) {
      z = normal_vector(d);
      n = z.norm();
    }
    return z / n;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace micromc
