#pragma once

#include <span>
#include <vector>

#include "fddisac/channel.hpp"

namespace fddisac {

/// Knobs of the 2D Newtonized OMP estimator.
struct NompConfig {
  int oversample_tau = 4;    ///< delay grid = oversample_tau * S points
  int oversample_theta = 4;  ///< angle grid = oversample_theta * N points
  int max_paths = 8;
  /// Stop when the best detection metric drops below
  /// gamma * noise_var * ln(NS) (+ a tiny floor relative to ||y||^2).
  double gamma = 8.0;
  double noise_var = 0.0;
  double relative_floor = 1e-9;
  int single_refine_steps = 1;
  int cyclic_rounds = 3;
  int max_backtracks = 10;
};

struct GridSize {
  int n_tau = 1;
  int n_theta = 1;
};

GridSize default_grid(const SystemGeometry& geom, const NompConfig& cfg);

/// Result of a coarse grid search.
struct Detection {
  double tau = 0.0;
  double theta = 0.0;
  cd alpha{0.0, 0.0};
  double metric = 0.0;
  int tau_index = 0;
  int theta_index = 0;
};

/// Estimated UL path set together with the final residual y - sum alpha u.
struct ParamEstimate {
  std::vector<PathParams> paths;
  CVec residual;
  int n_detected = 0;
};

/// Delay/angle of a grid node. Delay nodes are j/(n_tau*delta_f); angle nodes
/// are uniform in sin(theta) at cell midpoints.
double grid_tau(const SystemGeometry& geom, const GridSize& grid, int j);
double grid_theta(const GridSize& grid, int i);

/// Matched-filter metric |u^H y|^2 / ||u||^2.
double matched_metric(const CVec& y_residual, const SystemGeometry& geom,
                      double tau, double theta);

/// Grid argmax of the matched-filter metric plus the least-squares gain at
/// that node. Ties resolve to the lowest (tau, theta) index pair.
Detection detect_path(const CVec& y_residual, const SystemGeometry& geom,
                      const GridSize& grid);

/// Newton refinement of (tau, theta) on the single-path likelihood with the
/// gain re-fit after each step. Steps that would lower the matched-filter
/// metric are replaced by backtracked gradient steps, or rejected.
PathParams newton_refine(const CVec& y_residual, const SystemGeometry& geom,
                         PathParams estimate, int steps, int max_backtracks = 10);

/// Full estimator: detect, refine, cyclic refine, joint least-squares gains,
/// until the detection threshold or max_paths stops it. Deterministic.
ParamEstimate estimate(const UlObservation& obs, const SystemGeometry& geom,
                       const NompConfig& cfg);

/// DL channel (length N) at subcarrier s from UL estimates: gains scaled by
/// eta, delays/angles carried over, extrapolated by geom.extrapolation_f.
CVec reconstruct_dl(const ParamEstimate& est, double eta,
                    const SystemGeometry& geom, int s);

}  // namespace fddisac
