#include "fddisac/scnr.hpp"

#include <cmath>

#include "fddisac/sensing.hpp"

namespace fddisac {

void ScnrSpec::validate() const {
  if (targets.empty()) throw InvalidArgument("scnr.targets must be non-empty");
  if (!(sigma_r_sq > 0.0)) throw InvalidArgument("scnr.sigma_r_sq must be > 0");
  if (!(t_scnr > 0.0)) throw InvalidArgument("scnr.t_scnr must be > 0");
}

CMat reflector_matrix(int n_antennas, const std::vector<Reflector>& refl) {
  CMat g = CMat::Zero(n_antennas, n_antennas);
  for (const auto& r : refl) {
    const CVec a = ula_steering(n_antennas, r.theta);
    g += r.beta * (a * a.adjoint());
  }
  return g;
}

ScnrMatrices build_scnr(const Dims& dims, const ScnrSpec& spec, double power) {
  dims.validate();
  spec.validate();
  if (!(power > 0.0)) throw InvalidArgument("build_scnr: power must be > 0");
  const int n_ant = dims.n_antennas;
  const CMat gt = reflector_matrix(n_ant, spec.targets);
  const CMat gc = reflector_matrix(n_ant, spec.clutter);
  ScnrMatrices out{BlockDiagonal(dims.n_blocks(), n_ant),
                   BlockDiagonal(dims.n_blocks(), n_ant)};
  out.g_tar.add_to_all(gt.adjoint() * gt, 1.0);
  out.g_cl.add_to_all(gc.adjoint() * gc, 1.0);
  out.g_cl.add_identity(n_ant * spec.sigma_r_sq / power);
  return out;
}

double scnr_lagrangian(const CVec& p, double mu, const SinrBlocks& blocks,
                       const ScnrMatrices& g, double t_scnr, const SolverConfig& cfg,
                       double eta) {
  const CVec unit = p / p.norm();
  double value = smoothed_sum_rate(unit, blocks, eta, cfg.use_rs);
  if (mu != 0.0) value += mu * std::log2(g.scnr(unit) / t_scnr);
  return value;
}

KktMatrices build_scnr_kkt(const CVec& p, double mu, const SinrBlocks& blocks,
                           const ScnrMatrices& g, const SolverConfig& cfg, double eta) {
  if (!(mu >= 0.0)) throw InvalidArgument("build_scnr_kkt: mu must be >= 0");
  const int n_blocks = blocks.dims.n_blocks();
  const int n_ant = blocks.dims.n_antennas;
  KktMatrices out{BlockDiagonal(n_blocks, n_ant), BlockDiagonal(n_blocks, n_ant)};
  add_rate_terms(p, blocks, eta, cfg.use_rs, out);
  if (mu > 0.0) {
    const double num = g.g_tar.quad(p);
    if (num > 0.0) out.lhs.add_scaled(g.g_tar, mu / num);
    out.rhs.add_scaled(g.g_cl, mu / g.g_cl.quad(p));
  }
  return out;
}

SolveResult solve_scnr(const SinrBlocks& blocks, const ScnrMatrices& g,
                       const ScnrSpec& spec, const SolverConfig& cfg,
                       const CVec& p_init) {
  spec.validate();
  if (p_init.size() != blocks.dims.dim())
    throw InvalidArgument("solve_scnr: p_init length must be N(K+M+1)");
  double eta = cfg.eta_lse;
  auto inner = [&](double mu, const CVec& start) {
    InnerResult r = gpi_with_lse(
        [&](const CVec& p, double e) { return build_scnr_kkt(p, mu, blocks, g, cfg, e); },
        [&](const CVec& p, double e) {
          return scnr_lagrangian(p, mu, blocks, g, spec.t_scnr, cfg, e);
        },
        blocks, cfg, start, eta);
    eta = r.eta_lse;
    return r;
  };
  auto evaluate = [&](const CVec& p) {
    const double s = g.scnr(p);
    return std::make_pair(s >= spec.t_scnr, s);
  };
  // Relative to the threshold: SCNR values span several decades.
  auto slack = [&](const CVec& p, double mu) {
    return mu * (g.scnr(p) - spec.t_scnr) / spec.t_scnr / (1.0 + mu);
  };
  return search_multiplier(inner, evaluate, slack, cfg, p_init);
}

}  // namespace fddisac
