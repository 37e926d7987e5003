#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fddisac/channel.hpp"
#include "fddisac/ecm.hpp"
#include "fddisac/kkt.hpp"
#include "fddisac/nomp.hpp"
#include "fddisac/scnr.hpp"

namespace fddisac {

/// Bad experiment configuration. what() starts with the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Rs, RsNoEcm, NoRs, RadarOnly, Mrt, Rzf };
enum class Sweep { Tmse, Snr, Scnr };

const char* method_name(Method m);
Method parse_method(const std::string& name);
const char* sweep_name(Sweep s);
Sweep parse_sweep(const std::string& name);

struct ExperimentConfig {
  SystemGeometry geometry;
  /// UL training SNR in dB for unit total path power; sets geometry.noise_var_ul.
  double ul_snr_db = 20.0;
  int users = 4;
  int radar_streams = 4;
  ScenarioConfig scenario;
  double eta_reciprocity = 0.9;

  std::vector<double> snr_db{35.0};
  std::vector<double> t_mse_db{-11.0};
  std::vector<double> t_scnr_db{0.0, 5.0, 10.0, 15.0, 20.0};
  Sweep sweep = Sweep::Tmse;

  int n_trials = 50;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::Rs, Method::RsNoEcm, Method::NoRs,
                              Method::RadarOnly, Method::Mrt, Method::Rzf};

  // Sensing constraint and reporting.
  std::vector<double> targets_deg{0.0};
  double mainlobe_deg = 5.0;
  int n_grid = 181;
  double sidelobe_halfwidth_deg = 10.0;
  double pattern_grid_deg = 0.25;

  // SCNR variant. sigma_r_sq <= 0 means "same as the DL noise variance".
  std::vector<Reflector> scnr_targets{{cd{0.1, 0.0}, 0.0}};
  std::vector<Reflector> scnr_clutter{{cd{0.1, 0.0}, -40.0 * kPi / 180.0},
                                      {cd{0.1, 0.0}, 40.0 * kPi / 180.0}};
  double sigma_r_sq = -1.0;

  NompConfig nomp;
  EcmOptions ecm;
  SolverConfig solver;

  int workers = 1;
  bool timing = false;
  bool dump_precoders = false;

  /// Throws ConfigError naming the first bad field.
  void validate() const;
  /// Points of the active sweep (dB).
  const std::vector<double>& sweep_points() const;
};

/// Parses JSON text. Unknown keys are rejected so typos surface.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Every field, defaults included, as JSON text.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace fddisac
