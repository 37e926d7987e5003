#include "fddisac/sensing.hpp"

#include <cmath>

namespace fddisac {

CVec ula_steering(int n_antennas, double theta) {
  CVec a(n_antennas);
  const double st = std::sin(theta);
  for (int n = 0; n < n_antennas; ++n) a(n) = std::polar(1.0, -kPi * n * st);
  return a;
}

void SensingSpec::validate() const {
  if (grid_angles.empty()) throw InvalidArgument("sensing.grid must have >= 1 angle");
  if (target_pattern.size() != grid_angles.size())
    throw InvalidArgument("sensing.target_pattern length must match grid");
  for (double t : target_pattern)
    if (t != 0.0 && t != 1.0) throw InvalidArgument("sensing.target_pattern must be 0/1");
  if (!(t_mse > 0.0)) throw InvalidArgument("sensing.t_mse must be > 0");
}

SensingSpec make_sensing_spec(const std::vector<double>& target_angles_deg,
                              double t_mse_db, int n_grid, double mainlobe_deg) {
  if (n_grid < 1) throw InvalidArgument("sensing.n_grid must be >= 1");
  if (!(mainlobe_deg >= 0.0)) throw InvalidArgument("sensing.mainlobe_deg must be >= 0");
  SensingSpec spec;
  spec.t_mse = db_to_linear(t_mse_db);
  for (double t : target_angles_deg) spec.target_angles.push_back(t * kPi / 180.0);
  for (int u = 0; u < n_grid; ++u) {
    const double deg = n_grid == 1 ? 0.0 : -90.0 + 180.0 * u / (n_grid - 1);
    double t = 0.0;
    for (double target : target_angles_deg)
      if (std::abs(deg - target) <= mainlobe_deg + 1e-9) t = 1.0;
    spec.grid_angles.push_back(deg * kPi / 180.0);
    spec.target_pattern.push_back(t);
  }
  return spec;
}

CMat BeamMatrices::dense_a(int u, int n_blocks) const {
  const int d = n_antennas * n_blocks;
  CMat out = CMat::Zero(d, d);
  for (int b = 0; b < n_blocks; ++b)
    out.block(b * n_antennas, b * n_antennas, n_antennas, n_antennas) = power * outer[u];
  return out;
}

BeamMatrices beam_matrices(int n_antennas, const SensingSpec& sensing, double power) {
  sensing.validate();
  if (!(power > 0.0)) throw InvalidArgument("beam_matrices: power must be > 0");
  BeamMatrices out;
  out.power = power;
  out.n_antennas = n_antennas;
  for (std::size_t u = 0; u < sensing.grid_angles.size(); ++u) {
    CVec a = ula_steering(n_antennas, sensing.grid_angles[u]);
    out.outer.push_back(a * a.adjoint());
    out.steering.push_back(std::move(a));
    out.target_gain.push_back(power * n_antennas * sensing.target_pattern[u]);
  }
  return out;
}

std::vector<double> beam_gains(const CVec& p, const BeamMatrices& beams, int n_blocks) {
  const int n_ant = beams.n_antennas;
  if (p.size() != static_cast<Eigen::Index>(n_ant) * n_blocks)
    throw InvalidArgument("beam_gains: precoder length mismatch");
  // Columns of P as an N x B matrix; gain = P * ||a^H P||^2.
  const Eigen::Map<const CMat> cols(p.data(), n_ant, n_blocks);
  std::vector<double> gains(beams.steering.size());
  for (std::size_t u = 0; u < beams.steering.size(); ++u)
    gains[u] = beams.power * (beams.steering[u].adjoint() * cols).squaredNorm();
  return gains;
}

MseValue mse_r(const CVec& p, const BeamMatrices& beams, int n_blocks) {
  const std::vector<double> gains = beam_gains(p, beams, n_blocks);
  const double norm_sq = p.squaredNorm();
  double acc = 0.0;
  for (std::size_t u = 0; u < gains.size(); ++u) {
    const double diff = gains[u] - beams.target_gain[u] * norm_sq;
    acc += diff * diff;
  }
  MseValue out;
  out.absolute = acc / static_cast<double>(gains.size());
  out.normalized = out.absolute / beams.mse_scale();
  return out;
}

}  // namespace fddisac
