#pragma once

#include <vector>

#include "fddisac/gpi.hpp"

namespace fddisac {

/// Point reflector seen by the radar receiver.
struct Reflector {
  cd beta{0.1, 0.0};
  double theta = 0.0;  ///< radians
};

struct ScnrSpec {
  std::vector<Reflector> targets;
  std::vector<Reflector> clutter;
  double sigma_r_sq = 1.0;  ///< radar receiver noise variance
  double t_scnr = 1.0;      ///< SCNR threshold (linear)

  void validate() const;
};

/// Quadratic forms of the echo model:
/// gamma_R(p) = p' G_tar p / p' G_cl p with
/// G_tar = I kron (G^H G) over targets and
/// G_cl = I kron (G^H G) over clutter + (N sigma_R^2 / P) I.
struct ScnrMatrices {
  BlockDiagonal g_tar;
  BlockDiagonal g_cl;

  double scnr(const CVec& p) const { return g_tar.quad(p) / g_cl.quad(p); }
};

/// Sum of beta a(theta) a(theta)^H over reflectors.
CMat reflector_matrix(int n_antennas, const std::vector<Reflector>& refl);

ScnrMatrices build_scnr(const Dims& dims, const ScnrSpec& spec, double power);

/// Lagrangian smoothed_sum_rate + mu log2(gamma_R / T) at p / ||p||.
double scnr_lagrangian(const CVec& p, double mu, const SinrBlocks& blocks,
                       const ScnrMatrices& g, double t_scnr, const SolverConfig& cfg,
                       double eta);

KktMatrices build_scnr_kkt(const CVec& p, double mu, const SinrBlocks& blocks,
                           const ScnrMatrices& g, const SolverConfig& cfg, double eta);

/// GPI + bisection on mu; feasible when gamma_R >= T_scnr.
SolveResult solve_scnr(const SinrBlocks& blocks, const ScnrMatrices& g,
                       const ScnrSpec& spec, const SolverConfig& cfg,
                       const CVec& p_init);

}  // namespace fddisac
