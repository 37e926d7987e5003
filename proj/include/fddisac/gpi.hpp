#pragma once

#include <functional>
#include <vector>

#include "fddisac/kkt.hpp"

namespace fddisac {

/// Rotates p so its largest-magnitude entry is real and positive.
CVec fix_phase(const CVec& p);

struct InnerResult {
  CVec p;
  int iters = 0;
  bool converged = false;
  double objective = 0.0;      ///< final monitored objective (log2 zeta)
  int ascent_violations = 0;   ///< steps where the objective dropped by > 1e-9
  double eta_lse = 0.0;        ///< LSE sharpness in force at exit
};

/// p <- step(p) / ||step(p)|| until the phase-aligned change drops below eps
/// or t_max iterations. objective, when given, is monitored for ascent.
InnerResult generalized_power_iteration(
    const std::function<CVec(const CVec&)>& step, const CVec& p0, double eps,
    int t_max, const std::function<double(const CVec&)>& objective = {});

/// GPI over rhs(p)^{-1} lhs(p) p with LSE sharpness control: eta is doubled
/// (up to cfg.eta_lse_max) and the iteration resumed while the LSE gap of the
/// common rates exceeds cfg.lse_gap_bits.
InnerResult gpi_with_lse(
    const std::function<KktMatrices(const CVec&, double)>& build,
    const std::function<double(const CVec&, double)>& objective,
    const SinrBlocks& blocks, const SolverConfig& cfg, const CVec& p_init,
    double eta_start);

/// GPI at fixed nu with the beam-pattern MSE penalty.
InnerResult gpi_inner(double nu, const SinrBlocks& blocks, const BeamMatrices& beams,
                      const SensingSpec& sensing, const SolverConfig& cfg,
                      const CVec& p_init, double eta_start = 0.0);

struct OuterStep {
  double nu = 0.0;
  bool feasible = false;
  double constraint = 0.0;  ///< normalized MSE or SCNR (linear)
  double objective = 0.0;
  int inner_iters = 0;
  bool inner_converged = false;
};

struct SolveResult {
  CVec p;
  double nu_star = 0.0;
  bool feasible = false;
  double constraint = 0.0;
  int total_inner_iters = 0;
  int first_inner_iters = 0;
  bool first_inner_converged = false;
  int ascent_violations = 0;
  double eta_lse = 0.0;
  std::vector<OuterStep> history;
};

/// Bracketed bisection over a nonnegative multiplier. inner(nu, start) runs the
/// fixed-multiplier GPI; evaluate(p) returns (feasible, constraint value);
/// slack(p, nu) is the complementary-slackness residual of a feasible point.
/// Tries nu_min first, then nu_max, then bisects keeping the feasible end.
SolveResult search_multiplier(
    const std::function<InnerResult(double, const CVec&)>& inner,
    const std::function<std::pair<bool, double>(const CVec&)>& evaluate,
    const std::function<double(const CVec&, double)>& slack, const SolverConfig& cfg,
    const CVec& p_init);

/// Full beam-pattern-MSE constrained solve.
SolveResult solve(const SinrBlocks& blocks, const BeamMatrices& beams,
                  const SensingSpec& sensing, const SolverConfig& cfg,
                  const CVec& p_init);

/// Maximum-ratio superposition start: private blocks h_k/||h_k||, common block
/// the normalized sum (zero without rate splitting), radar blocks steered at
/// the targets in turn, then unit total norm.
CVec initial_precoder(const std::vector<CVec>& channels, const Dims& dims,
                      const std::vector<double>& target_angles, bool use_rs);

}  // namespace fddisac
