#include "fddisac/kkt.hpp"

#include <algorithm>
#include <cmath>

namespace fddisac {

void SolverConfig::validate() const {
  if (!(eta_lse > 0.0)) throw InvalidArgument("solver.eta_lse must be > 0");
  if (!(eta_lse_max >= eta_lse))
    throw InvalidArgument("solver.eta_lse_max must be >= solver.eta_lse");
  if (!(eps_p > 0.0)) throw InvalidArgument("solver.eps_p must be > 0");
  if (t_max < 1) throw InvalidArgument("solver.t_max must be >= 1");
  if (!(nu_min >= 0.0)) throw InvalidArgument("solver.nu_min must be >= 0");
  if (!(nu_max >= nu_min)) throw InvalidArgument("solver.nu_max must be >= solver.nu_min");
  if (n_max < 1) throw InvalidArgument("solver.n_max must be >= 1");
  if (!(slack_tol >= 0.0)) throw InvalidArgument("solver.slack_tol must be >= 0");
  if (!(power > 0.0)) throw InvalidArgument("solver.power must be > 0");
}

double lse_min(std::span<const double> values, double eta) {
  if (values.empty()) throw InvalidArgument("lse_min: empty input");
  if (!(eta > 0.0)) throw InvalidArgument("lse_min: eta must be > 0");
  const double lo = *std::min_element(values.begin(), values.end());
  double acc = 0.0;
  for (double x : values) acc += std::exp(-eta * (x - lo));
  return lo - std::log(acc / static_cast<double>(values.size())) / eta;
}

std::vector<double> lse_weights(std::span<const double> values, double eta) {
  if (values.empty()) throw InvalidArgument("lse_weights: empty input");
  const double lo = *std::min_element(values.begin(), values.end());
  std::vector<double> w(values.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    w[k] = std::exp(-eta * (values[k] - lo));
    acc += w[k];
  }
  for (double& x : w) x /= acc;
  return w;
}

std::vector<double> common_rates(const CVec& p, const SinrBlocks& blocks) {
  std::vector<double> rates(blocks.dims.n_users);
  for (int k = 0; k < blocks.dims.n_users; ++k)
    rates[k] = std::log2(blocks.common_ratio(k, p));
  return rates;
}

double smoothed_sum_rate(const CVec& p, const SinrBlocks& blocks, double eta,
                         bool use_rs) {
  double total = 0.0;
  if (use_rs) total += lse_min(common_rates(p, blocks), eta);
  for (int k = 0; k < blocks.dims.n_users; ++k)
    total += std::log2(blocks.private_ratio(k, p));
  return total;
}

void add_rate_terms(const CVec& p, const SinrBlocks& blocks, double eta, bool use_rs,
                    KktMatrices& out) {
  const int n_users = blocks.dims.n_users;
  if (use_rs) {
    const std::vector<double> w = lse_weights(common_rates(p, blocks), eta);
    for (int k = 0; k < n_users; ++k) {
      out.lhs.add_scaled(blocks.u_common[k], w[k] / blocks.u_common[k].quad(p));
      out.rhs.add_scaled(blocks.v_common[k], w[k] / blocks.v_common[k].quad(p));
    }
  }
  for (int k = 0; k < n_users; ++k) {
    out.lhs.add_scaled(blocks.u_private[k], 1.0 / blocks.u_private[k].quad(p));
    out.rhs.add_scaled(blocks.v_private[k], 1.0 / blocks.v_private[k].quad(p));
  }
}

KktMatrices build_kkt_matrices(const CVec& p, double nu, const SinrBlocks& blocks,
                               const BeamMatrices& beams, const SolverConfig& cfg,
                               double eta) {
  if (!(nu >= 0.0)) throw InvalidArgument("build_kkt_matrices: nu must be >= 0");
  const int n_blocks = blocks.dims.n_blocks();
  const int n_ant = blocks.dims.n_antennas;
  KktMatrices out{BlockDiagonal(n_blocks, n_ant), BlockDiagonal(n_blocks, n_ant)};
  add_rate_terms(p, blocks, eta, cfg.use_rs, out);

  if (nu > 0.0 && beams.n_angles() > 0) {
    // Sphere-homogeneous sensing penalty; with a_u = p'A_u p, tau_u = P N t_u:
    //   lhs += c sum (tau_u A_u + a_u^2 I),  rhs += c sum (a_u A_u + a_u tau_u I).
    const double c = 2.0 * nu * std::log(2.0) /
                     (static_cast<double>(beams.n_angles()) * beams.mse_scale());
    const std::vector<double> gains = beam_gains(p, beams, n_blocks);
    CMat lhs_outer = CMat::Zero(n_ant, n_ant);
    CMat rhs_outer = CMat::Zero(n_ant, n_ant);
    double lhs_id = 0.0;
    double rhs_id = 0.0;
    for (int u = 0; u < beams.n_angles(); ++u) {
      const double a = gains[u];
      const double tau = beams.target_gain[u];
      lhs_outer += (tau * beams.power) * beams.outer[u];
      rhs_outer += (a * beams.power) * beams.outer[u];
      lhs_id += a * a;
      rhs_id += a * tau;
    }
    out.lhs.add_to_all(lhs_outer, c).add_identity(c * lhs_id);
    out.rhs.add_to_all(rhs_outer, c).add_identity(c * rhs_id);
  }
  return out;
}

double log2_zeta(const CVec& p, double nu, const SinrBlocks& blocks,
                 const BeamMatrices& beams, double t_mse, const SolverConfig& cfg,
                 double eta) {
  const CVec unit = p / p.norm();
  double value = smoothed_sum_rate(unit, blocks, eta, cfg.use_rs);
  if (nu != 0.0) value -= nu * (mse_r(unit, beams, blocks.dims.n_blocks()).normalized - t_mse);
  return value;
}

double zeta(const CVec& p, double nu, const SinrBlocks& blocks,
            const BeamMatrices& beams, double t_mse, const SolverConfig& cfg,
            double eta) {
  return std::exp2(log2_zeta(p, nu, blocks, beams, t_mse, cfg, eta));
}

}  // namespace fddisac
