#include "fddisac/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fddisac/sensing.hpp"

namespace fddisac {

RateSet se_lower_bound(const CVec& p, const SinrBlocks& blocks) {
  const int n_users = blocks.dims.n_users;
  if (p.size() != blocks.dims.dim())
    throw InvalidArgument("se_lower_bound: precoder length mismatch");
  RateSet out;
  double common = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_users; ++k)
    common = std::min(common, std::log2(blocks.common_ratio(k, p)));
  out.common = std::max(common, 0.0);
  out.sum = out.common;
  for (int k = 0; k < n_users; ++k) {
    out.privates.push_back(std::log2(blocks.private_ratio(k, p)));
    out.sum += out.privates.back();
  }
  return out;
}

RateSet se_actual_mc(const CVec& p, const std::vector<CVec>& true_channels,
                     const Dims& dims, double sigma_sq_over_p) {
  const SinrBlocks genie = build_sinr_blocks(true_channels, {}, sigma_sq_over_p, dims,
                                             /*use_ecm=*/false);
  return se_lower_bound(p, genie);
}

std::vector<double> pattern_angles(double step_deg) {
  if (!(step_deg > 0.0)) throw InvalidArgument("pattern grid step must be > 0");
  const int n = static_cast<int>(std::floor(180.0 / step_deg + 1e-9)) + 1;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = (-90.0 + i * step_deg) * kPi / 180.0;
  return out;
}

BeamPattern beam_pattern(const CVec& p, int n_antennas, double power,
                         const std::vector<double>& angles) {
  if (n_antennas < 1 || p.size() % n_antennas != 0)
    throw InvalidArgument("beam_pattern: precoder length must be a multiple of N");
  const int n_blocks = static_cast<int>(p.size() / n_antennas);
  const Eigen::Map<const CMat> cols(p.data(), n_antennas, n_blocks);
  BeamPattern out;
  out.angles = angles;
  out.gain.resize(angles.size());
  for (std::size_t u = 0; u < angles.size(); ++u) {
    const CVec a = ula_steering(n_antennas, angles[u]);
    out.gain[u] = power * (a.adjoint() * cols).squaredNorm();
  }
  const double peak =
      out.gain.empty() ? 0.0 : *std::max_element(out.gain.begin(), out.gain.end());
  out.gain_db.resize(angles.size());
  for (std::size_t u = 0; u < angles.size(); ++u) {
    const double rel = peak > 0.0 ? out.gain[u] / peak : 0.0;
    out.gain_db[u] = rel > 0.0 ? std::max(linear_to_db(rel), kPatternFloorDb)
                               : kPatternFloorDb;
  }
  return out;
}

double sidelobe_suppression(const BeamPattern& pattern,
                            const std::vector<double>& target_angles,
                            double mainlobe_halfwidth) {
  if (pattern.gain_db.empty()) throw InvalidArgument("sidelobe_suppression: empty pattern");
  double peak = -std::numeric_limits<double>::infinity();
  double side = -std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < pattern.angles.size(); ++u) {
    const double g = pattern.gain_db[u];
    peak = std::max(peak, g);
    bool in_main = false;
    for (double t : target_angles)
      if (std::abs(pattern.angles[u] - t) <= mainlobe_halfwidth + 1e-12) in_main = true;
    if (!in_main) side = std::max(side, g);
  }
  if (!std::isfinite(side))
    throw InvalidArgument("sidelobe_suppression: main-lobe windows cover the grid");
  return side - peak;
}

}  // namespace fddisac
