#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fddisac {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kJ{0.0, 1.0};

/// Thrown for invalid inputs (bad dimensions, out-of-range parameters).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Seedable generator with the complex-Gaussian draw used throughout the
/// simulator. One instance per Monte-Carlo worker; never shared.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Substream for (seed, index) pairs. Output depends only on the pair, so
  /// trial results do not depend on worker scheduling.
  static Rng substream(std::uint64_t seed, std::uint64_t index,
                       std::uint64_t stream = 0) {
    std::uint64_t z = splitmix64(seed);
    z = splitmix64(z ^ splitmix64(index + 0x9E3779B97F4A7C15ULL));
    z = splitmix64(z ^ splitmix64(stream + 0xD1B54A32D192ED03ULL));
    return Rng(z);
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  cd complex_normal(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace fddisac
