#pragma once

#include <vector>

#include "fddisac/sinr_blocks.hpp"

namespace fddisac {

struct RateSet {
  double common = 0.0;
  std::vector<double> privates;
  double sum = 0.0;
};

/// Lower-bound SE with the hard min over the per-user common rates.
RateSet se_lower_bound(const CVec& p, const SinrBlocks& blocks);

/// Instantaneous SE evaluated at the true channels (no error covariance).
RateSet se_actual_mc(const CVec& p, const std::vector<CVec>& true_channels,
                     const Dims& dims, double sigma_sq_over_p);

struct BeamPattern {
  std::vector<double> angles;   ///< radians
  std::vector<double> gain;     ///< P a^H P P^H a
  std::vector<double> gain_db;  ///< normalized to 0 dB peak, floored at -80 dB
};

inline constexpr double kPatternFloorDb = -80.0;

/// Uniform angle grid over [-90, 90] deg with the given spacing.
std::vector<double> pattern_angles(double step_deg = 0.25);

BeamPattern beam_pattern(const CVec& p, int n_antennas, double power,
                         const std::vector<double>& angles);

/// Highest normalized gain outside every +-halfwidth window around the
/// targets, in dB relative to the peak (<= 0).
double sidelobe_suppression(const BeamPattern& pattern,
                            const std::vector<double>& target_angles,
                            double mainlobe_halfwidth);

struct TrialResult {
  double se_common = 0.0;
  std::vector<double> se_private;
  double se_sum = 0.0;
  double mse_achieved_db = 0.0;
  double sidelobe_db = 0.0;
  double nu_star = 0.0;
  int inner_iters = 0;
  bool feasible = false;
};

}  // namespace fddisac
