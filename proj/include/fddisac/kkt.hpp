#pragma once

#include <span>
#include <vector>

#include "fddisac/block_diag.hpp"
#include "fddisac/sensing.hpp"
#include "fddisac/sinr_blocks.hpp"

namespace fddisac {

/// Algorithm knobs shared by the MSE and SCNR solvers.
struct SolverConfig {
  double eta_lse = 10.0;      ///< LogSumExp sharpness at start
  double eta_lse_max = 40.0;  ///< doubling cap
  double lse_gap_bits = 0.1;  ///< double eta while the LSE gap exceeds this
  double eps_p = 1e-5;
  int t_max = 100;
  double nu_min = 0.0;
  double nu_max = 1e3;
  double eps_nu = -1.0;       ///< <= 0 means 1e-3 * nu_max
  int n_max = 20;
  /// Extra bisection steps allowed past eps_nu while the complementary
  /// slackness residual nu (T - g) / (1 + nu) exceeds slack_tol. 0 disables.
  double slack_tol = 1e-4;
  int n_max_slack = 40;
  double power = 1.0;         ///< transmit power P (linear)
  bool use_rs = true;
  bool radar_only = false;

  double nu_tolerance() const { return eps_nu > 0.0 ? eps_nu : 1e-3 * nu_max; }
  void validate() const;
};

/// -(1/eta) log((1/K) sum exp(-eta x_k)), max-shifted.
double lse_min(std::span<const double> values, double eta);
/// d lse_min / d x_k (softmax of -eta x).
std::vector<double> lse_weights(std::span<const double> values, double eta);

/// Numerator/denominator matrices of the stationarity condition
/// lhs(p) p = lambda rhs(p) p, scaled so that the Wirtinger gradient of the
/// Lagrangian on the unit sphere equals (lhs - rhs) p / ln 2.
struct KktMatrices {
  BlockDiagonal lhs;
  BlockDiagonal rhs;
};

/// log2 of the per-user common ratios gamma_c(k).
std::vector<double> common_rates(const CVec& p, const SinrBlocks& blocks);

/// Smoothed sum rate: LSE of the common rates (if use_rs) + sum private rates.
double smoothed_sum_rate(const CVec& p, const SinrBlocks& blocks, double eta,
                         bool use_rs);

/// Adds the rate terms to lhs/rhs.
void add_rate_terms(const CVec& p, const SinrBlocks& blocks, double eta, bool use_rs,
                    KktMatrices& out);

KktMatrices build_kkt_matrices(const CVec& p, double nu, const SinrBlocks& blocks,
                               const BeamMatrices& beams, const SolverConfig& cfg,
                               double eta);

/// Lagrangian smoothed_sum_rate - nu * (mse_norm - t_mse), evaluated at
/// p / ||p||. This is log2 of zeta.
double log2_zeta(const CVec& p, double nu, const SinrBlocks& blocks,
                 const BeamMatrices& beams, double t_mse, const SolverConfig& cfg,
                 double eta);

double zeta(const CVec& p, double nu, const SinrBlocks& blocks,
            const BeamMatrices& beams, double t_mse, const SolverConfig& cfg,
            double eta);

}  // namespace fddisac
