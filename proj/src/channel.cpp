#include "fddisac/channel.hpp"

#include <cmath>
#include <string>

namespace fddisac {

void SystemGeometry::validate() const {
  if (n_antennas < 1) throw InvalidArgument("geometry.n_antennas must be >= 1");
  if (n_subcarriers < 1)
    throw InvalidArgument("geometry.n_subcarriers must be >= 1");
  if (!(delta_f > 0.0)) throw InvalidArgument("geometry.delta_f must be > 0");
  if (!(f_c_ul > 0.0)) throw InvalidArgument("geometry.f_c_ul must be > 0");
  if (!(f_c_dl > 0.0)) throw InvalidArgument("geometry.f_c_dl must be > 0");
  if (!(noise_var_ul >= 0.0))
    throw InvalidArgument("geometry.noise_var_ul must be >= 0");
}

void UserChannel::validate(const SystemGeometry& geom) const {
  if (paths.empty()) throw InvalidArgument("user channel needs at least one path");
  if (eta.size() != paths.size())
    throw InvalidArgument("user channel: eta length must match path count");
  for (std::size_t l = 0; l < paths.size(); ++l) {
    const auto& p = paths[l];
    if (!(p.tau > 0.0 && p.tau < 1.0 / geom.delta_f))
      throw InvalidArgument("path " + std::to_string(l) +
                            ": delay outside (0, 1/delta_f)");
    if (!(std::abs(p.theta) < kPi / 2))
      throw InvalidArgument("path " + std::to_string(l) +
                            ": angle outside (-pi/2, pi/2)");
    if (!(eta[l] >= 0.0 && eta[l] <= 1.0))
      throw InvalidArgument("path " + std::to_string(l) + ": eta outside [0,1]");
  }
  if (!(sigma_path_sq >= 0.0))
    throw InvalidArgument("user channel: sigma_path_sq must be >= 0");
}

CVec steering_vector(const SystemGeometry& geom, double tau, double theta) {
  const int n_ant = geom.n_antennas;
  const int n_sc = geom.n_subcarriers;
  CVec u(geom.length());
  for (int s = 1; s <= n_sc; ++s) {
    const double phi = geom.phi(theta, s);
    const double delay_phase =
        -2.0 * kPi * geom.subcarrier_offset(s) * geom.delta_f * tau;
    for (int n = 0; n < n_ant; ++n) {
      u(n + n_ant * (s - 1)) = std::polar(1.0, -2.0 * kPi * n * phi + delay_phase);
    }
  }
  return u;
}

std::vector<PathParams> make_dl_params(const UserChannel& user, Rng& rng) {
  std::vector<PathParams> dl = user.paths;
  for (std::size_t l = 0; l < dl.size(); ++l) {
    const double eta = user.eta[l];
    const cd beta = rng.complex_normal(user.sigma_path_sq);
    dl[l].alpha = eta * user.paths[l].alpha + std::sqrt(1.0 - eta * eta) * beta;
  }
  return dl;
}

CVec channel_vector(const SystemGeometry& geom, std::span<const PathParams> paths,
                    Band band, int s) {
  if (s < 1 || s > geom.n_subcarriers)
    throw InvalidArgument("subcarrier index out of range");
  const double offset_f = (band == Band::Dl) ? geom.extrapolation_f : 0.0;
  const double freq = offset_f + geom.subcarrier_offset(s) * geom.delta_f;
  CVec h = CVec::Zero(geom.n_antennas);
  for (const auto& p : paths) {
    const double phi = geom.phi(p.theta, s);
    const cd delay = std::polar(1.0, -2.0 * kPi * freq * p.tau);
    for (int n = 0; n < geom.n_antennas; ++n) {
      h(n) += p.alpha * std::polar(1.0, -2.0 * kPi * n * phi) * delay;
    }
  }
  return h;
}

CVec synthesize_ul(const SystemGeometry& geom, std::span<const PathParams> paths) {
  CVec y = CVec::Zero(geom.length());
  for (const auto& p : paths) y += p.alpha * steering_vector(geom, p.tau, p.theta);
  return y;
}

UlObservation simulate_ul_observation(const SystemGeometry& geom,
                                      const UserChannel& user, Rng& rng,
                                      int user_index) {
  const CVec clean = synthesize_ul(geom, user.paths);
  UlObservation obs;
  obs.user_index = user_index;
  obs.y.resize(geom.n_antennas, geom.n_subcarriers);
  for (Eigen::Index i = 0; i < clean.size(); ++i) {
    obs.y.data()[i] = clean(i) + (geom.noise_var_ul > 0.0
                                      ? rng.complex_normal(geom.noise_var_ul)
                                      : cd{0.0, 0.0});
  }
  return obs;
}

double ul_snr(const UserChannel& user, double noise_var) {
  double power = 0.0;
  for (const auto& p : user.paths) power += std::norm(p.alpha);
  return power / noise_var;
}

UserChannel draw_user_channel(const SystemGeometry& geom,
                              const ScenarioConfig& cfg, Rng& rng) {
  if (cfg.min_paths < 1 || cfg.max_paths < cfg.min_paths)
    throw InvalidArgument("scenario: invalid path-count range");
  UserChannel user;
  const int n_paths = rng.uniform_int(cfg.min_paths, cfg.max_paths);
  const double tau_max = 1.0 / geom.delta_f;
  double power = 0.0;
  for (int l = 0; l < n_paths; ++l) {
    PathParams p;
    p.alpha = rng.complex_normal(1.0);
    // Open interval (0, 1/delta_f).
    do {
      p.tau = rng.uniform(0.0, tau_max);
    } while (p.tau <= 0.0);
    p.theta = rng.uniform(-cfg.max_angle, cfg.max_angle);
    power += std::norm(p.alpha);
    user.paths.push_back(p);
  }
  for (auto& p : user.paths) p.alpha /= std::sqrt(power);
  user.eta.assign(user.paths.size(), cfg.eta);
  user.sigma_path_sq =
      cfg.sigma_path_sq > 0.0 ? cfg.sigma_path_sq : 1.0 / static_cast<double>(n_paths);
  return user;
}

}  // namespace fddisac
