#pragma once

#include <vector>

#include "fddisac/block_diag.hpp"
#include "fddisac/sinr_blocks.hpp"

namespace fddisac {

/// Half-wavelength ULA steering vector, entry n = exp(-j pi n sin(theta)).
CVec ula_steering(int n_antennas, double theta);

/// Beam-pattern matching constraint on a fixed angle grid.
struct SensingSpec {
  std::vector<double> grid_angles;    ///< radians
  std::vector<double> target_pattern; ///< 0 or 1 per grid angle
  std::vector<double> target_angles;  ///< radians, used for init and sidelobes
  double t_mse = 0.1;                 ///< normalized MSE threshold (linear)

  void validate() const;
};

/// Uniform grid of n_grid angles over [-90, 90] deg with t = 1 inside
/// +-mainlobe_deg of every target.
SensingSpec make_sensing_spec(const std::vector<double>& target_angles_deg,
                              double t_mse_db, int n_grid = 181,
                              double mainlobe_deg = 5.0);

/// A(theta_u) = P * (I kron a a^H) stored as its N x N repeated block;
/// T(theta_u) = P * N * t_u * I.
struct BeamMatrices {
  double power = 1.0;
  int n_antennas = 1;
  std::vector<CVec> steering;
  std::vector<CMat> outer;         ///< a a^H
  std::vector<double> target_gain; ///< P * N * t_u

  int n_angles() const { return static_cast<int>(steering.size()); }
  /// Dense D x D form of A(theta_u), for tests.
  CMat dense_a(int u, int n_blocks) const;
  /// Scale of the normalized MSE, (P N)^2.
  double mse_scale() const {
    const double s = power * n_antennas;
    return s * s;
  }
};

BeamMatrices beam_matrices(int n_antennas, const SensingSpec& sensing, double power);

/// p^H A(theta_u) p for every grid angle.
std::vector<double> beam_gains(const CVec& p, const BeamMatrices& beams, int n_blocks);

struct MseValue {
  double absolute = 0.0;
  double normalized = 0.0;
};

/// (1/L) sum |p'A p - p'T p|^2 and its value divided by (P N)^2.
MseValue mse_r(const CVec& p, const BeamMatrices& beams, int n_blocks);

}  // namespace fddisac
