#pragma once

#include <span>
#include <vector>

#include "fddisac/types.hpp"

namespace fddisac {

/// One propagation path: complex gain, delay [s] and angle [rad].
struct PathParams {
  cd alpha{1.0, 0.0};
  double tau = 0.0;
  double theta = 0.0;
};

/// ULA / OFDM layout shared by UL training and DL reconstruction.
struct SystemGeometry {
  int n_antennas = 8;
  int n_subcarriers = 64;
  double delta_f = 120e3;
  double f_c_ul = 7.25e9;
  double f_c_dl = 7.75e9;
  /// DL-minus-UL frequency offset used when extrapolating the channel.
  double extrapolation_f = 190e6;
  double noise_var_ul = 0.01;

  void validate() const;
  double bandwidth() const { return n_subcarriers * delta_f; }
  int length() const { return n_antennas * n_subcarriers; }

  /// Centered subcarrier offset s - ceil(S/2) - 1 for 1-based s.
  int subcarrier_offset(int s) const {
    return s - (n_subcarriers + 1) / 2 - 1;
  }
  /// Subcarrier whose centered offset is zero.
  int center_subcarrier() const { return (n_subcarriers + 1) / 2 + 1; }

  /// Spatial frequency of a path at (1-based) subcarrier s, including the
  /// wideband squint term.
  double phi(double theta, int s) const {
    return 0.5 * std::sin(theta) * (1.0 + s * delta_f / f_c_ul);
  }
  /// d phi / d theta.
  double dphi(double theta, int s) const {
    return 0.5 * std::cos(theta) * (1.0 + s * delta_f / f_c_ul);
  }
};

/// Ground-truth UL paths of one user plus its reciprocity model.
struct UserChannel {
  std::vector<PathParams> paths;
  /// Per-path reciprocity coefficient in [0, 1]; same length as paths.
  std::vector<double> eta;
  /// Variance of the non-reciprocal DL gain component.
  double sigma_path_sq = 1.0;

  void validate(const SystemGeometry& geom) const;
};

/// Received UL training block, N x S (column-major vectorization n + N*(s-1)).
struct UlObservation {
  CMat y;
  int user_index = 0;

  CVec vectorized() const {
    return Eigen::Map<const CVec>(y.data(), y.size());
  }
};

enum class Band { Ul, Dl };

/// Statistics of the random scenario generator.
struct ScenarioConfig {
  int min_paths = 2;
  int max_paths = 4;
  double max_angle = 60.0 * kPi / 180.0;
  double eta = 0.9;
  /// Non-reciprocal gain variance; <= 0 means "mean per-path power" (1/L).
  double sigma_path_sq = -1.0;
};

/// Steering/delay signature u(tau, theta) of length N*S.
CVec steering_vector(const SystemGeometry& geom, double tau, double theta);

/// DL paths under partial reciprocity: tau and theta copied, gains mixed with
/// an independent CN(0, sigma_path_sq) draw.
std::vector<PathParams> make_dl_params(const UserChannel& user, Rng& rng);

/// Narrowband channel vector (length N) of a path set at subcarrier s.
CVec channel_vector(const SystemGeometry& geom, std::span<const PathParams> paths,
                    Band band, int s);

/// Noisy UL training observation with per-entry noise variance
/// geom.noise_var_ul.
UlObservation simulate_ul_observation(const SystemGeometry& geom,
                                      const UserChannel& user, Rng& rng,
                                      int user_index = 0);

/// Noiseless UL signal sum_l alpha_l u(tau_l, theta_l), vectorized.
CVec synthesize_ul(const SystemGeometry& geom, std::span<const PathParams> paths);

/// UL SNR as reported by the harness: sum |alpha|^2 / sigma^2.
double ul_snr(const UserChannel& user, double noise_var);

/// Random sparse multipath user drawn from the scenario statistics. Gains
/// are normalized so that sum |alpha|^2 = 1.
UserChannel draw_user_channel(const SystemGeometry& geom,
                              const ScenarioConfig& cfg, Rng& rng);

}  // namespace fddisac
