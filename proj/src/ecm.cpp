#include "fddisac/ecm.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fddisac {

ObservedFim observed_fim(const UlObservation& obs, const ParamEstimate& est,
                         const SystemGeometry& geom, double sigma_sq) {
  if (est.paths.empty()) throw InvalidArgument("observed_fim: empty estimate");
  if (!(sigma_sq > 0.0)) throw InvalidArgument("observed_fim: sigma_sq must be > 0");
  const CVec y = obs.vectorized();
  if (y.size() != geom.length())
    throw InvalidArgument("observed_fim: observation size does not match geometry");

  const int n_paths = static_cast<int>(est.paths.size());
  const int dim = 4 * n_paths;
  const Eigen::Index ns = geom.length();
  const int n_ant = geom.n_antennas;

  // First derivatives, one column per parameter.
  CMat d1(ns, dim);
  // Per-path phase-rate factors: du/dtau = kt * u, du/dtheta = kth * u.
  std::vector<CVec> atoms(n_paths), kt(n_paths), kth(n_paths), kthth(n_paths);
  for (int l = 0; l < n_paths; ++l) {
    const auto& p = est.paths[l];
    atoms[l] = steering_vector(geom, p.tau, p.theta);
    kt[l].resize(ns);
    kth[l].resize(ns);
    kthth[l].resize(ns);
    for (int s = 1; s <= geom.n_subcarriers; ++s) {
      const double so = geom.subcarrier_offset(s);
      const double dphi = geom.dphi(p.theta, s);
      const double ddphi = -geom.phi(p.theta, s);
      for (int n = 0; n < n_ant; ++n) {
        const Eigen::Index i = n + n_ant * (s - 1);
        kt[l](i) = -kJ * (2.0 * kPi * so * geom.delta_f);
        kth[l](i) = -kJ * (2.0 * kPi * n * dphi);
        const cd second = -kJ * (2.0 * kPi * n * ddphi);
        kthth[l](i) = kth[l](i) * kth[l](i) + second;
      }
    }
    const cd a = p.alpha;
    d1.col(4 * l + 0) = atoms[l];
    d1.col(4 * l + 1) = kJ * atoms[l];
    d1.col(4 * l + 2) = a * kt[l].cwiseProduct(atoms[l]);
    d1.col(4 * l + 3) = a * kth[l].cwiseProduct(atoms[l]);
  }

  const CVec residual = y - synthesize_ul(geom, est.paths);
  RMat info = (d1.adjoint() * d1).real();

  // Second-derivative term, nonzero only within a path block.
  for (int l = 0; l < n_paths; ++l) {
    const cd a = est.paths[l].alpha;
    const CVec& u = atoms[l];
    std::array<std::array<CVec, 4>, 4> d2;
    const CVec zero = CVec::Zero(ns);
    for (auto& row : d2) row.fill(zero);
    d2[0][2] = kt[l].cwiseProduct(u);
    d2[1][2] = kJ * d2[0][2];
    d2[0][3] = kth[l].cwiseProduct(u);
    d2[1][3] = kJ * d2[0][3];
    d2[2][2] = a * kt[l].cwiseProduct(kt[l]).cwiseProduct(u);
    d2[3][3] = a * kthth[l].cwiseProduct(u);
    d2[2][3] = a * kt[l].cwiseProduct(kth[l]).cwiseProduct(u);
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) {
        const double term = std::real(residual.dot(d2[i][j]));
        info(4 * l + i, 4 * l + j) -= term;
        if (i != j) info(4 * l + j, 4 * l + i) -= term;
      }
    }
  }

  ObservedFim fim;
  fim.matrix = (2.0 / sigma_sq) * info;
  fim.n_paths = n_paths;
  return fim;
}

CMat dl_jacobian(const ParamEstimate& est, double eta, const SystemGeometry& geom,
                 int s) {
  if (est.paths.empty()) throw InvalidArgument("dl_jacobian: empty estimate");
  if (s < 1 || s > geom.n_subcarriers)
    throw InvalidArgument("dl_jacobian: subcarrier index out of range");
  const int n_paths = static_cast<int>(est.paths.size());
  const int n_ant = geom.n_antennas;
  const double freq = geom.extrapolation_f + geom.subcarrier_offset(s) * geom.delta_f;
  CMat q(4 * n_paths, n_ant);
  for (int l = 0; l < n_paths; ++l) {
    const auto& p = est.paths[l];
    const double phi = geom.phi(p.theta, s);
    const double dphi = geom.dphi(p.theta, s);
    const cd delay = std::polar(1.0, -2.0 * kPi * freq * p.tau);
    const cd g = eta * p.alpha;
    for (int n = 0; n < n_ant; ++n) {
      const cd u = std::polar(1.0, -2.0 * kPi * n * phi) * delay;
      q(4 * l + 0, n) = eta * u;
      q(4 * l + 1, n) = kJ * eta * u;
      q(4 * l + 2, n) = g * (-kJ * 2.0 * kPi * freq) * u;
      q(4 * l + 3, n) = g * (-kJ * (2.0 * kPi * n * dphi)) * u;
    }
  }
  return q;
}

ErrorCovariance estimate_ecm(const ObservedFim& fim, const CMat& jac) {
  const Eigen::Index dim = fim.matrix.rows();
  if (dim == 0 || fim.matrix.cols() != dim)
    throw InvalidArgument("estimate_ecm: FIM must be square and non-empty");
  if (jac.rows() != dim)
    throw InvalidArgument("estimate_ecm: Jacobian rows must match FIM size");

  ErrorCovariance out;
  const RMat sym = 0.5 * (fim.matrix + fim.matrix.transpose());
  RVec scale(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    scale(i) = sym(i, i) > 0.0 ? 1.0 / std::sqrt(sym(i, i)) : 1.0;
  RMat eq = scale.asDiagonal() * sym * scale.asDiagonal();

  Eigen::LLT<RMat> llt(eq);
  if (llt.info() != Eigen::Success) {
    double ridge = 1e-10 * eq.trace() / static_cast<double>(dim);
    if (!(ridge > 0.0)) ridge = 1e-10;
    for (int attempt = 0; attempt < 40; ++attempt, ridge *= 10.0) {
      llt.compute(eq + ridge * RMat::Identity(dim, dim));
      if (llt.info() == Eigen::Success) break;
    }
    out.regularized = true;
    out.ridge = ridge;
  }
  const RMat inv_eq = llt.solve(RMat::Identity(dim, dim));
  const RMat inv = scale.asDiagonal() * inv_eq * scale.asDiagonal();

  out.full = jac.adjoint() * inv.cast<cd>() * jac;
  out.diag.resize(out.full.rows());
  for (Eigen::Index n = 0; n < out.full.rows(); ++n) {
    const double v = std::real(out.full(n, n));
    if (v < 0.0) {
      ++out.clamp_events;
      out.diag(n) = 0.0;
    } else {
      out.diag(n) = v;
    }
  }
  return out;
}

ReconstructedChannel reconstruct_channel(const UlObservation& obs,
                                         const SystemGeometry& geom,
                                         const NompConfig& nomp_cfg, double eta,
                                         double sigma_path_sq, int s,
                                         const EcmOptions& opts) {
  ReconstructedChannel rc;
  rc.est = estimate(obs, geom, nomp_cfg);
  rc.h_hat = reconstruct_dl(rc.est, eta, geom, s);
  if (rc.est.paths.empty() || !(geom.noise_var_ul > 0.0)) {
    rc.ecm.diag = RVec::Zero(geom.n_antennas);
    rc.ecm.full = CMat::Zero(geom.n_antennas, geom.n_antennas);
  } else {
    const ObservedFim fim = observed_fim(obs, rc.est, geom, geom.noise_var_ul);
    rc.ecm = estimate_ecm(fim, dl_jacobian(rc.est, eta, geom, s));
  }
  if (opts.add_gain_mismatch) {
    const double extra = static_cast<double>(rc.est.paths.size()) *
                         (1.0 - eta * eta) * sigma_path_sq;
    rc.ecm.diag.array() += extra;
  }
  return rc;
}

}  // namespace fddisac
