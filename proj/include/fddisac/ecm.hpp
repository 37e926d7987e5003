#pragma once

#include <vector>

#include "fddisac/channel.hpp"
#include "fddisac/nomp.hpp"

namespace fddisac {

/// Observed Fisher information of the UL likelihood at the estimate.
/// Parameter order: [Re a1, Im a1, tau1, theta1, Re a2, ...], tau in seconds.
struct ObservedFim {
  RMat matrix;
  int n_paths = 0;
};

struct ErrorCovariance {
  RVec diag;  ///< per-antenna MSE, clamped at zero
  CMat full;  ///< Q^H I^{-1} Q before diagonalization
  bool regularized = false;
  double ridge = 0.0;
  int clamp_events = 0;
};

struct EcmOptions {
  /// Adds (1 - eta^2) * sigma_path_sq per path to every diagonal entry.
  bool add_gain_mismatch = false;
};

ObservedFim observed_fim(const UlObservation& obs, const ParamEstimate& est,
                         const SystemGeometry& geom, double sigma_sq);

/// 4L x N matrix; row 4l+i is d h_dl / d(param i of path l), gain rows
/// scaled by eta.
CMat dl_jacobian(const ParamEstimate& est, double eta, const SystemGeometry& geom,
                 int s);

/// Q^H I^{-1} Q with a Cholesky inverse after Jacobi scaling; a small ridge
/// is added when the factorization fails.
ErrorCovariance estimate_ecm(const ObservedFim& fim, const CMat& jac);

/// Estimated DL channel of one user together with its error covariance.
struct ReconstructedChannel {
  CVec h_hat;
  ErrorCovariance ecm;
  ParamEstimate est;
};

/// NOMP -> DL reconstruction -> ECM for one user at DL subcarrier s.
ReconstructedChannel reconstruct_channel(const UlObservation& obs,
                                         const SystemGeometry& geom,
                                         const NompConfig& nomp_cfg, double eta,
                                         double sigma_path_sq, int s,
                                         const EcmOptions& opts = {});

}  // namespace fddisac
