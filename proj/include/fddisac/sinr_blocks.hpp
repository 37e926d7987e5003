#pragma once

#include <vector>

#include "fddisac/block_diag.hpp"

namespace fddisac {

/// Precoder layout: [common | private 1..K | radar 1..M], N entries each.
struct Dims {
  int n_antennas = 8;
  int n_users = 4;
  int n_radar = 4;

  int n_blocks() const { return n_users + n_radar + 1; }
  int dim() const { return n_antennas * n_blocks(); }
  int common_block() const { return 0; }
  int private_block(int k) const { return 1 + k; }
  int radar_block(int m) const { return 1 + n_users + m; }
  void validate() const;
};

/// Quadratic-form SINR matrices. gamma_c(k) = p'Uc p / p'Vc p and
/// gamma_k = p'Up p / p'Vp p, both equal to 1 + SINR.
struct SinrBlocks {
  Dims dims;
  double noise_floor = 0.0;  ///< sigma^2 / P
  std::vector<BlockDiagonal> u_common, v_common, u_private, v_private;

  double common_ratio(int k, const CVec& p) const {
    return u_common[k].quad(p) / v_common[k].quad(p);
  }
  double private_ratio(int k, const CVec& p) const {
    return u_private[k].quad(p) / v_private[k].quad(p);
  }
};

/// Builds all 4K matrices from channel estimates and diagonal ECMs. The first
/// block of the private matrices carries the ECM (plus the noise floor) so the
/// common precoder's leakage through the estimation error is counted.
SinrBlocks build_sinr_blocks(const std::vector<CVec>& channels,
                             const std::vector<RVec>& ecm_diag,
                             double sigma_sq_over_p, const Dims& dims, bool use_ecm);

}  // namespace fddisac
