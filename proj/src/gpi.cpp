#include "fddisac/gpi.hpp"

#include <algorithm>
#include <cmath>

namespace fddisac {

namespace {

CVec align_phase(const CVec& p, const CVec& ref) {
  const cd inner = ref.dot(p);
  if (std::abs(inner) == 0.0) return p;
  return p * std::conj(inner / std::abs(inner));
}

}  // namespace

CVec fix_phase(const CVec& p) {
  if (p.size() == 0) return p;
  Eigen::Index idx = 0;
  p.cwiseAbs().maxCoeff(&idx);
  const double mag = std::abs(p(idx));
  if (mag == 0.0) return p;
  return p * std::conj(p(idx) / mag);
}

InnerResult generalized_power_iteration(
    const std::function<CVec(const CVec&)>& step, const CVec& p0, double eps,
    int t_max, const std::function<double(const CVec&)>& objective) {
  const double n0 = p0.norm();
  if (!(n0 > 0.0)) throw InvalidArgument("power iteration: zero start vector");
  InnerResult out;
  CVec p = p0 / n0;
  double prev = objective ? objective(p) : 0.0;
  for (int t = 1; t <= t_max; ++t) {
    CVec next = step(p);
    const double nn = next.norm();
    if (!(nn > 0.0) || !std::isfinite(nn)) break;
    next = align_phase(next / nn, p);
    const double change = (next - p).norm();
    p = std::move(next);
    out.iters = t;
    if (objective) {
      const double cur = objective(p);
      if (cur < prev - 1e-9 * std::max(1.0, std::abs(prev))) ++out.ascent_violations;
      prev = cur;
    }
    if (change < eps) {
      out.converged = true;
      break;
    }
  }
  out.p = fix_phase(p);
  out.objective = objective ? prev : 0.0;
  return out;
}

InnerResult gpi_with_lse(
    const std::function<KktMatrices(const CVec&, double)>& build,
    const std::function<double(const CVec&, double)>& objective,
    const SinrBlocks& blocks, const SolverConfig& cfg, const CVec& p_init,
    double eta_start) {
  double eta = eta_start > 0.0 ? eta_start : cfg.eta_lse;
  CVec start = p_init;
  InnerResult res;
  int total_iters = 0;
  int violations = 0;
  for (;;) {
    auto step = [&](const CVec& p) {
      const KktMatrices m = build(p, eta);
      return m.rhs.solve(m.lhs.apply(p));
    };
    auto monitored = [&](const CVec& p) { return objective(p, eta); };
    res = generalized_power_iteration(step, start, cfg.eps_p, cfg.t_max, monitored);
    total_iters += res.iters;
    violations += res.ascent_violations;
    if (!cfg.use_rs || eta >= cfg.eta_lse_max) break;
    const std::vector<double> rates = common_rates(res.p, blocks);
    const double gap = lse_min(rates, eta) - *std::min_element(rates.begin(), rates.end());
    if (gap <= cfg.lse_gap_bits) break;
    eta = std::min(2.0 * eta, cfg.eta_lse_max);
    start = res.p;
  }
  res.iters = total_iters;
  res.ascent_violations = violations;
  res.eta_lse = eta;
  return res;
}

InnerResult gpi_inner(double nu, const SinrBlocks& blocks, const BeamMatrices& beams,
                      const SensingSpec& sensing, const SolverConfig& cfg,
                      const CVec& p_init, double eta_start) {
  return gpi_with_lse(
      [&](const CVec& p, double eta) {
        return build_kkt_matrices(p, nu, blocks, beams, cfg, eta);
      },
      [&](const CVec& p, double eta) {
        return log2_zeta(p, nu, blocks, beams, sensing.t_mse, cfg, eta);
      },
      blocks, cfg, p_init, eta_start);
}

SolveResult search_multiplier(
    const std::function<InnerResult(double, const CVec&)>& inner,
    const std::function<std::pair<bool, double>(const CVec&)>& evaluate,
    const std::function<double(const CVec&, double)>& slack, const SolverConfig& cfg,
    const CVec& p_init) {
  cfg.validate();
  SolveResult out;
  auto run = [&](double nu, const CVec& start) {
    const InnerResult r = inner(nu, start);
    const auto [ok, value] = evaluate(r.p);
    OuterStep s{nu, ok, value, r.objective, r.iters, r.converged};
    if (out.history.empty()) {
      out.first_inner_iters = r.iters;
      out.first_inner_converged = r.converged;
    }
    out.history.push_back(s);
    out.total_inner_iters += r.iters;
    out.ascent_violations += r.ascent_violations;
    out.eta_lse = r.eta_lse;
    return std::make_pair(r.p, s);
  };
  auto accept = [&](const CVec& p, const OuterStep& s) {
    out.p = p;
    out.nu_star = s.nu;
    out.feasible = s.feasible;
    out.constraint = s.constraint;
  };

  if (cfg.radar_only) {
    const auto [p, s] = run(cfg.nu_max, p_init);
    accept(p, s);
    return out;
  }

  const auto [p_lo, s_lo] = run(cfg.nu_min, p_init);
  if (s_lo.feasible) {
    accept(p_lo, s_lo);
    return out;
  }
  const auto [p_hi, s_hi] = run(cfg.nu_max, p_lo);
  accept(p_hi, s_hi);
  if (!s_hi.feasible) return out;

  double lo = cfg.nu_min;
  double hi = cfg.nu_max;
  CVec best = p_hi;
  const double tol = cfg.nu_tolerance();
  for (int n = 0; n < cfg.n_max_slack + cfg.n_max; ++n) {
    const bool coarse = (hi - lo) > tol && n < cfg.n_max;
    const bool refine = cfg.slack_tol > 0.0 && slack && slack(best, hi) > cfg.slack_tol &&
                        n < cfg.n_max + cfg.n_max_slack;
    if (!coarse && !refine) break;
    const double mid = 0.5 * (lo + hi);
    const auto [p_mid, s_mid] = run(mid, best);
    if (s_mid.feasible) {
      hi = mid;
      best = p_mid;
      accept(p_mid, s_mid);
    } else {
      lo = mid;
    }
  }
  return out;
}

SolveResult solve(const SinrBlocks& blocks, const BeamMatrices& beams,
                  const SensingSpec& sensing, const SolverConfig& cfg,
                  const CVec& p_init) {
  sensing.validate();
  if (p_init.size() != blocks.dims.dim())
    throw InvalidArgument("solve: p_init length must be N(K+M+1)");
  const int n_blocks = blocks.dims.n_blocks();
  double eta = cfg.eta_lse;
  auto inner = [&](double nu, const CVec& start) {
    InnerResult r = gpi_inner(nu, blocks, beams, sensing, cfg, start, eta);
    eta = r.eta_lse;
    return r;
  };
  auto evaluate = [&](const CVec& p) {
    const double m = mse_r(p, beams, n_blocks).normalized;
    return std::make_pair(m <= sensing.t_mse, m);
  };
  auto slack = [&](const CVec& p, double nu) {
    return nu * (sensing.t_mse - mse_r(p, beams, n_blocks).normalized) / (1.0 + nu);
  };
  return search_multiplier(inner, evaluate, slack, cfg, p_init);
}

CVec initial_precoder(const std::vector<CVec>& channels, const Dims& dims,
                      const std::vector<double>& target_angles, bool use_rs) {
  dims.validate();
  if (static_cast<int>(channels.size()) != dims.n_users)
    throw InvalidArgument("initial_precoder: expected one channel per user");
  const int n_ant = dims.n_antennas;
  auto unit_or_flat = [n_ant](const CVec& v) -> CVec {
    const double n = v.norm();
    if (n > 0.0) return v / n;
    return CVec::Ones(n_ant) / std::sqrt(static_cast<double>(n_ant));
  };
  CVec p = CVec::Zero(dims.dim());
  CVec sum = CVec::Zero(n_ant);
  for (int k = 0; k < dims.n_users; ++k) {
    const CVec u = unit_or_flat(channels[k]);
    p.segment(static_cast<Eigen::Index>(dims.private_block(k)) * n_ant, n_ant) = u;
    sum += u;
  }
  if (use_rs) p.head(n_ant) = unit_or_flat(sum);
  for (int m = 0; m < dims.n_radar; ++m) {
    const double theta =
        target_angles.empty() ? 0.0 : target_angles[m % target_angles.size()];
    CVec a(n_ant);
    for (int n = 0; n < n_ant; ++n) a(n) = std::polar(1.0, -kPi * n * std::sin(theta));
    p.segment(static_cast<Eigen::Index>(dims.radar_block(m)) * n_ant, n_ant) =
        a / std::sqrt(static_cast<double>(n_ant));
  }
  return p / p.norm();
}

}  // namespace fddisac
