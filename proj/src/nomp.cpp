#include "fddisac/nomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fddisac {

namespace {

constexpr double kThetaLimit = kPi / 2 - 1e-9;

// Correlation of y with u(tau, theta) and its first/second derivatives in
// normalized delay x = tau * delta_f and theta.
struct Correlation {
  cd c0{}, cx{}, ct{}, cxx{}, ctt{}, cxt{};
};

Correlation correlate(const CVec& y, const SystemGeometry& geom, double tau,
                      double theta) {
  Correlation out;
  const int n_ant = geom.n_antennas;
  const double x = tau * geom.delta_f;
  for (int s = 1; s <= geom.n_subcarriers; ++s) {
    const double so = geom.subcarrier_offset(s);
    const double phi = geom.phi(theta, s);
    const double dphi = geom.dphi(theta, s);
    const double ddphi = -phi;  // d^2 phi / d theta^2 = -phi
    const double dx = -2.0 * kPi * so;
    for (int n = 0; n < n_ant; ++n) {
      const cd u = std::polar(1.0, -2.0 * kPi * (n * phi + so * x));
      const cd w = std::conj(y(n + n_ant * (s - 1))) * u;
      const double dt = -2.0 * kPi * n * dphi;
      const double ddt = -2.0 * kPi * n * ddphi;
      // du/dx = j*dx*u, du/dt = j*dt*u
      out.c0 += w;
      out.cx += kJ * dx * w;
      out.ct += kJ * dt * w;
      out.cxx += -(dx * dx) * w;
      out.ctt += (-(dt * dt) + kJ * ddt) * w;
      out.cxt += -(dx * dt) * w;
    }
  }
  return out;
}

double wrap_unit(double x) { return x - std::floor(x); }

PathParams with_ls_gain(const CVec& y, const SystemGeometry& geom, double tau,
                        double theta) {
  const Correlation c = correlate(y, geom, tau, theta);
  // u^H y = conj(sum conj(y) u)
  return PathParams{std::conj(c.c0) / static_cast<double>(geom.length()), tau, theta};
}

}  // namespace

GridSize default_grid(const SystemGeometry& geom, const NompConfig& cfg) {
  return GridSize{std::max(1, cfg.oversample_tau * geom.n_subcarriers),
                  std::max(1, cfg.oversample_theta * geom.n_antennas)};
}

double grid_tau(const SystemGeometry& geom, const GridSize& grid, int j) {
  return static_cast<double>(j) / (grid.n_tau * geom.delta_f);
}

double grid_theta(const GridSize& grid, int i) {
  return std::asin(-1.0 + (2.0 * i + 1.0) / grid.n_theta);
}

double matched_metric(const CVec& y_residual, const SystemGeometry& geom,
                      double tau, double theta) {
  const CVec u = steering_vector(geom, tau, theta);
  return std::norm(u.dot(y_residual)) / u.squaredNorm();
}

Detection detect_path(const CVec& y_residual, const SystemGeometry& geom,
                      const GridSize& grid) {
  if (grid.n_tau < 1 || grid.n_theta < 1)
    throw InvalidArgument("detect_path: grid sizes must be >= 1");
  if (y_residual.size() != geom.length())
    throw InvalidArgument("detect_path: residual length must be N*S");
  const int n_ant = geom.n_antennas;
  const int n_sc = geom.n_subcarriers;

  // Delay twiddles e^{+j 2 pi s' j / n_tau}.
  CMat delay_tw(grid.n_tau, n_sc);
  for (int j = 0; j < grid.n_tau; ++j)
    for (int s = 1; s <= n_sc; ++s)
      delay_tw(j, s - 1) = std::polar(
          1.0, 2.0 * kPi * geom.subcarrier_offset(s) *
                   (static_cast<double>(j) / grid.n_tau));

  RMat metric(grid.n_tau, grid.n_theta);
  CMat corr(grid.n_tau, grid.n_theta);
  CVec z(n_sc);
  for (int i = 0; i < grid.n_theta; ++i) {
    const double theta = grid_theta(grid, i);
    for (int s = 1; s <= n_sc; ++s) {
      const double phi = geom.phi(theta, s);
      cd acc{0.0, 0.0};
      for (int n = 0; n < n_ant; ++n)
        acc += std::polar(1.0, 2.0 * kPi * n * phi) * y_residual(n + n_ant * (s - 1));
      z(s - 1) = acc;
    }
    const CVec c = delay_tw * z;  // u^H y at every delay node
    corr.col(i) = c;
    metric.col(i) = c.cwiseAbs2() / static_cast<double>(geom.length());
  }

  Detection best;
  best.metric = -1.0;
  for (int j = 0; j < grid.n_tau; ++j) {
    for (int i = 0; i < grid.n_theta; ++i) {
      if (metric(j, i) > best.metric) {
        best.metric = metric(j, i);
        best.tau_index = j;
        best.theta_index = i;
      }
    }
  }
  best.tau = grid_tau(geom, grid, best.tau_index);
  best.theta = grid_theta(grid, best.theta_index);
  best.alpha = corr(best.tau_index, best.theta_index) /
               static_cast<double>(geom.length());
  return best;
}

PathParams newton_refine(const CVec& y_residual, const SystemGeometry& geom,
                         PathParams est, int steps, int max_backtracks) {
  if (steps < 0) throw InvalidArgument("newton_refine: steps must be >= 0");
  double x = est.tau * geom.delta_f;
  double theta = est.theta;
  cd alpha = est.alpha;
  double current = matched_metric(y_residual, geom, est.tau, theta);

  for (int it = 0; it < steps; ++it) {
    const Correlation c = correlate(y_residual, geom, x / geom.delta_f, theta);
    // Newton on the gain-concentrated metric |c0|^2 / L. Holding alpha fixed
    // instead overstates the angle curvature and converges only linearly.
    const double inv_len = 1.0 / static_cast<double>(geom.length());
    Eigen::Vector2d grad(2.0 * std::real(std::conj(c.c0) * c.cx) * inv_len,
                         2.0 * std::real(std::conj(c.c0) * c.ct) * inv_len);
    Eigen::Matrix2d hess;
    hess(0, 0) = 2.0 * (std::norm(c.cx) + std::real(std::conj(c.c0) * c.cxx)) * inv_len;
    hess(1, 1) = 2.0 * (std::norm(c.ct) + std::real(std::conj(c.c0) * c.ctt)) * inv_len;
    hess(0, 1) = hess(1, 0) =
        2.0 * std::real(std::conj(c.cx) * c.ct + std::conj(c.c0) * c.cxt) * inv_len;
    if (grad.norm() == 0.0) break;

    auto try_point = [&](const Eigen::Vector2d& step) -> bool {
      const double nx = wrap_unit(x + step(0));
      const double nt = std::clamp(theta + step(1), -kThetaLimit, kThetaLimit);
      const double m = matched_metric(y_residual, geom, nx / geom.delta_f, nt);
      if (m >= current) {
        x = nx;
        theta = nt;
        current = m;
        return true;
      }
      return false;
    };

    bool accepted = false;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(hess);
    if (eig.eigenvalues().maxCoeff() < 0.0) {
      accepted = try_point(-hess.ldlt().solve(grad));
    }
    if (!accepted) {
      double mu = 1.0 / std::max(hess.cwiseAbs().maxCoeff(), 1e-12);
      for (int b = 0; b <= max_backtracks && !accepted; ++b, mu *= 0.5)
        accepted = try_point(mu * grad);
    }
    if (!accepted) break;
    alpha = with_ls_gain(y_residual, geom, x / geom.delta_f, theta).alpha;
  }
  return PathParams{alpha, x / geom.delta_f, theta};
}

ParamEstimate estimate(const UlObservation& obs, const SystemGeometry& geom,
                       const NompConfig& cfg) {
  if (cfg.max_paths < 1) throw InvalidArgument("nomp: max_paths must be >= 1");
  const CVec y = obs.vectorized();
  if (y.size() != geom.length())
    throw InvalidArgument("nomp: observation size does not match geometry");
  const GridSize grid = default_grid(geom, cfg);
  const double threshold =
      cfg.gamma * cfg.noise_var * std::log(static_cast<double>(geom.length())) +
      cfg.relative_floor * y.squaredNorm();

  ParamEstimate est;
  CVec residual = y;
  std::vector<CVec> atoms;

  while (static_cast<int>(est.paths.size()) < cfg.max_paths) {
    const Detection det = detect_path(residual, geom, grid);
    if (det.metric <= threshold) break;

    PathParams path = newton_refine(residual, geom, PathParams{det.alpha, det.tau, det.theta},
                                    cfg.single_refine_steps, cfg.max_backtracks);
    CVec atom = steering_vector(geom, path.tau, path.theta);
    residual -= path.alpha * atom;
    est.paths.push_back(path);
    atoms.push_back(std::move(atom));

    for (int round = 0; round < cfg.cyclic_rounds; ++round) {
      for (std::size_t l = 0; l < est.paths.size(); ++l) {
        const CVec others = residual + est.paths[l].alpha * atoms[l];
        est.paths[l] = newton_refine(others, geom, est.paths[l], 1, cfg.max_backtracks);
        atoms[l] = steering_vector(geom, est.paths[l].tau, est.paths[l].theta);
        residual = others - est.paths[l].alpha * atoms[l];
      }
    }

    CMat dict(geom.length(), static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t l = 0; l < atoms.size(); ++l) dict.col(static_cast<Eigen::Index>(l)) = atoms[l];
    const CVec gains = dict.colPivHouseholderQr().solve(y);
    const CVec joint_residual = y - dict * gains;
    // Keep the joint fit only when it does not increase the residual power.
    if (joint_residual.squaredNorm() <= residual.squaredNorm()) {
      for (std::size_t l = 0; l < est.paths.size(); ++l)
        est.paths[l].alpha = gains(static_cast<Eigen::Index>(l));
      residual = joint_residual;
    }
  }

  est.residual = residual;
  est.n_detected = static_cast<int>(est.paths.size());
  return est;
}

CVec reconstruct_dl(const ParamEstimate& est, double eta, const SystemGeometry& geom,
                    int s) {
  std::vector<PathParams> dl = est.paths;
  for (auto& p : dl) p.alpha *= eta;
  return channel_vector(geom, dl, Band::Dl, s);
}

}  // namespace fddisac
