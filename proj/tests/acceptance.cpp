// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit code is
// the number of failures. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fddisac/ecm.hpp"
#include "fddisac/experiment.hpp"
#include "fddisac/nomp.hpp"

using namespace fddisac;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <typename... Args>
std::string fmtn(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CVec random_vec(Rng& rng, int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.complex_normal(1.0);
  return v;
}

struct MeanSe {
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
};

MeanSe mean_sd(const std::vector<double>& v) {
  MeanSe m;
  m.n = static_cast<int>(v.size());
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= m.n;
  if (m.n > 1) {
    for (double x : v) m.sd += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(m.sd / (m.n - 1));
  }
  return m;
}

double pooled_se(const MeanSe& a, const MeanSe& b) {
  return std::sqrt(a.sd * a.sd / a.n + b.sd * b.sd / b.n);
}

std::vector<double> se_of(const RunOutput& out, Method m, int point) {
  std::vector<double> v;
  for (const auto& r : out.rows)
    if (r.method == m && r.point == point) v.push_back(r.se_sum);
  return v;
}

// ---------------------------------------------------------------- 1
Outcome gradient_check() {
  Rng rng(101);
  const Dims dims{4, 2, 2};
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<CVec> h;
    std::vector<RVec> ecm;
    for (int k = 0; k < dims.n_users; ++k) {
      h.push_back(random_vec(rng, dims.n_antennas));
      RVec e(dims.n_antennas);
      for (int n = 0; n < dims.n_antennas; ++n) e(n) = rng.uniform(0.0, 0.1);
      ecm.push_back(e);
    }
    SolverConfig cfg;
    cfg.power = db_to_linear(rng.uniform(10.0, 35.0));
    const SinrBlocks blocks = build_sinr_blocks(h, ecm, 1.0 / cfg.power, dims, true);
    const SensingSpec sens = make_sensing_spec({rng.uniform(-60.0, 60.0)}, -10.0);
    const BeamMatrices beams = beam_matrices(dims.n_antennas, sens, cfg.power);
    CVec p = random_vec(rng, dims.dim());
    p /= p.norm();
    const double nu = rng.uniform(0.0, 100.0);
    const double eta = cfg.eta_lse;

    const KktMatrices m = build_kkt_matrices(p, nu, blocks, beams, cfg, eta);
    CVec analytic = (m.lhs.apply(p) - m.rhs.apply(p)) / std::log(2.0);
    auto f = [&](const CVec& x) {
      return log2_zeta(x, nu, blocks, beams, sens.t_mse, cfg, eta);
    };
    // Real-coordinate central differences, assembled as a Wirtinger gradient.
    CVec numeric(dims.dim());
    const double step = 1e-6;
    for (int i = 0; i < dims.dim(); ++i) {
      CVec e = CVec::Zero(dims.dim());
      e(i) = step;
      const double d_re = (f(p + e) - f(p - e)) / (2 * step);
      e(i) = cd{0.0, step};
      const double d_im = (f(p + e) - f(p - e)) / (2 * step);
      numeric(i) = 0.5 * cd{d_re, d_im};
    }
    auto tangent = [&](const CVec& g) -> CVec { return g - p * std::real(p.dot(g)); };
    analytic = tangent(analytic);
    numeric = tangent(numeric);
    worst = std::max(worst, (numeric - analytic).norm() / analytic.norm());
  }
  return {worst < 1e-4, fmt("max relative error %.2e over 20 points (limit 1e-4)", worst)};
}

// ---------------------------------------------------------------- 2
Outcome eigen_oracle() {
  Rng rng(202);
  double worst = 1.0;
  int worst_iters = 0;
  for (int t = 0; t < 20; ++t) {
    const int d = rng.uniform_int(2, 40);
    CMat a(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.complex_normal(1.0);
    const CMat k = a * a.adjoint();
    const Eigen::SelfAdjointEigenSolver<CMat> eig(k);
    const CVec lead = eig.eigenvectors().col(d - 1);
    const InnerResult r = generalized_power_iteration(
        [&](const CVec& p) -> CVec { return k * p; }, random_vec(rng, d), 1e-12, 200000);
    worst = std::min(worst, std::abs(lead.dot(r.p)));
    worst_iters = std::max(worst_iters, r.iters);
  }
  return {worst > 1.0 - 1e-6,
          fmtn("min |cos| = 1 - %.2e over 20 matrices, max %d iterations", 1.0 - worst,
               worst_iters)};
}

// ---------------------------------------------------------------- 3
Outcome block_equivalence() {
  Rng rng(303);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Dims dims{rng.uniform_int(1, 8), rng.uniform_int(1, 5), rng.uniform_int(0, 4)};
    std::vector<CVec> h;
    std::vector<RVec> ecm;
    for (int k = 0; k < dims.n_users; ++k) {
      h.push_back(random_vec(rng, dims.n_antennas));
      RVec e(dims.n_antennas);
      for (int n = 0; n < dims.n_antennas; ++n) e(n) = rng.uniform(0.0, 0.3);
      ecm.push_back(e);
    }
    const double floor = rng.uniform(1e-4, 1.0);
    CVec p = random_vec(rng, dims.dim());
    p /= p.norm();
    const SinrBlocks sb = build_sinr_blocks(h, ecm, floor, dims, true);
    const int n = dims.n_antennas;
    for (int k = 0; k < dims.n_users; ++k) {
      double leak = 0.0;
      for (int b = 0; b < dims.n_blocks(); ++b)
        leak += (p.segment(b * n, n).cwiseAbs2().array() * ecm[k].array()).sum();
      double mui = 0.0;
      for (int b = 1; b < dims.n_blocks(); ++b) mui += std::norm(h[k].dot(p.segment(b * n, n)));
      const double sc = std::norm(h[k].dot(p.head(n)));
      const double sk = std::norm(h[k].dot(p.segment(dims.private_block(k) * n, n)));
      const double gc = 1.0 + sc / (mui + leak + floor);
      const double gk = 1.0 + sk / (mui - sk + leak + floor);
      worst = std::max(worst, std::abs(sb.common_ratio(k, p) - gc) / gc);
      worst = std::max(worst, std::abs(sb.private_ratio(k, p) - gk) / gk);
    }
  }
  return {worst < 1e-10, fmt("max relative deviation %.2e over 100 instances", worst)};
}

// ---------------------------------------------------------------- 4
Outcome nomp_recovery() {
  const SystemGeometry g;
  NompConfig cfg;
  cfg.noise_var = 0.0;
  double worst_tau = 0.0, worst_theta = 0.0, worst_gain = 0.0;
  int failures = 0;
  for (int seed = 0; seed < 50; ++seed) {
    Rng rng = Rng::substream(404, seed);
    std::vector<PathParams> truth;
    while (truth.size() < 2) {
      PathParams p{std::polar(rng.uniform(0.5, 1.0), rng.uniform(0.0, 2 * kPi)),
                   rng.uniform(0.05, 0.95) / g.delta_f, rng.uniform(-1.0, 1.0)};
      bool separated = true;
      for (const auto& q : truth)
        if (std::abs(p.tau - q.tau) * g.delta_f < 0.1 ||
            std::abs(std::sin(p.theta) - std::sin(q.theta)) < 0.3)
          separated = false;
      if (separated) truth.push_back(p);
    }
    const CVec y = synthesize_ul(g, truth);
    UlObservation obs;
    obs.y = Eigen::Map<const CMat>(y.data(), g.n_antennas, g.n_subcarriers);
    const ParamEstimate est = estimate(obs, g, cfg);
    bool ok = true;
    for (const auto& t : truth) {
      double best_tau = 1e9, best_theta = 1e9, best_gain = 1e9, best_d = 1e18;
      for (const auto& e : est.paths) {
        const double dt = std::abs(e.tau - t.tau) * g.delta_f;
        const double dth = std::abs(e.theta - t.theta);
        if (dt + dth < best_d) {
          best_d = dt + dth;
          best_tau = dt;
          best_theta = dth;
          best_gain = std::abs(e.alpha - t.alpha) / std::abs(t.alpha);
        }
      }
      worst_tau = std::max(worst_tau, best_tau);
      worst_theta = std::max(worst_theta, best_theta);
      worst_gain = std::max(worst_gain, best_gain);
      if (!(best_tau < 1e-3 && best_theta < 1e-3 && best_gain < 1e-2)) ok = false;
    }
    failures += ok ? 0 : 1;
  }
  return {failures == 0,
          fmtn("%d/50 seeds failed; worst delay err %.1e/df, angle %.1e rad, gain %.1e",
               failures, worst_tau, worst_theta, worst_gain)};
}

// ---------------------------------------------------------------- 5
Outcome fim_check() {
  const SystemGeometry g;
  Rng rng(505);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n_paths = rng.uniform_int(1, 3);
    std::vector<PathParams> truth;
    for (int l = 0; l < n_paths; ++l)
      truth.push_back({rng.complex_normal(1.0), rng.uniform(0.05, 0.95) / g.delta_f,
                       rng.uniform(-1.0, 1.0)});
    const double sigma_sq = db_to_linear(-rng.uniform(5.0, 30.0));
    CVec y = synthesize_ul(g, truth);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += rng.complex_normal(sigma_sq);
    UlObservation obs;
    obs.y = Eigen::Map<const CMat>(y.data(), g.n_antennas, g.n_subcarriers);
    ParamEstimate est;
    est.paths = truth;
    for (auto& p : est.paths) {
      p.tau += rng.uniform(-1e-3, 1e-3) / g.delta_f;
      p.theta += rng.uniform(-1e-3, 1e-3);
    }
    const ObservedFim fim = observed_fim(obs, est, g, sigma_sq);

    const int dim = 4 * n_paths;
    RVec x0(dim), step(dim);
    for (int l = 0; l < n_paths; ++l) {
      x0.segment(4 * l, 4) << est.paths[l].alpha.real(), est.paths[l].alpha.imag(),
          est.paths[l].tau, est.paths[l].theta;
      step.segment(4 * l, 4) << 1e-5, 1e-5, 1e-5 / g.delta_f, 1e-5;
    }
    auto loglik = [&](const RVec& x) {
      std::vector<PathParams> ps(n_paths);
      for (int l = 0; l < n_paths; ++l)
        ps[l] = {cd{x(4 * l), x(4 * l + 1)}, x(4 * l + 2), x(4 * l + 3)};
      return -(y - synthesize_ul(g, ps)).squaredNorm() / sigma_sq;
    };
    RMat hess(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        RVec pp = x0, pm = x0, mp = x0, mm = x0;
        pp(i) += step(i), pp(j) += step(j);
        pm(i) += step(i), pm(j) -= step(j);
        mp(i) -= step(i), mp(j) += step(j);
        mm(i) -= step(i), mm(j) -= step(j);
        hess(i, j) = hess(j, i) = (loglik(pp) - loglik(pm) - loglik(mp) + loglik(mm)) /
                                  (4.0 * step(i) * step(j));
      }
    const RMat a = step.asDiagonal() * fim.matrix * step.asDiagonal();
    const RMat b = -(step.asDiagonal() * hess * step.asDiagonal());
    worst = std::max(worst, (a - b).norm() / b.norm());
  }
  return {worst < 1e-4, fmt("max relative error %.2e over 20 instances", worst)};
}

// ---------------------------------------------------------------- 6
Outcome ecm_calibration() {
  const ExperimentConfig cfg = parse_config(R"({
    "geometry": {"ul_snr_db": 25}, "eta_reciprocity": 1.0, "n_trials": 200, "seed": 606
  })");
  double predicted = 0.0, empirical = 0.0;
  int count = 0;
  for (int t = 0; t < cfg.n_trials; ++t) {
    const TrialChannels ch = draw_trial(cfg, t);
    for (std::size_t k = 0; k < ch.h_hat.size(); ++k) {
      const double n = static_cast<double>(ch.h_hat[k].size());
      predicted += ch.ecm_diag[k].sum() / n;
      empirical += (ch.h_hat[k] - ch.h_true[k]).squaredNorm() / n;
      ++count;
    }
  }
  predicted /= count;
  empirical /= count;
  const double ratio = predicted / empirical;
  return {ratio >= 0.5 && ratio <= 2.0,
          fmtn("predicted %.3e vs empirical %.3e per antenna, ratio %.3f (%d users)",
               predicted, empirical, ratio, count)};
}

// ---------------------------------------------------------------- 7, 8
RunOutput headline_run() {
  const ExperimentConfig cfg = parse_config(R"({"n_trials": 100, "seed": 707, "methods": ["rs"]})");
  return run_experiment(cfg);
}

Outcome convergence(const RunOutput& out) {
  int ok = 0, total = 0;
  std::vector<int> iters;
  for (const auto& r : out.rows) {
    ++total;
    iters.push_back(r.first_inner_iters);
    if (r.first_inner_converged && r.first_inner_iters <= 50) ++ok;
  }
  std::sort(iters.begin(), iters.end());
  const double frac = total ? static_cast<double>(ok) / total : 0.0;
  return {frac >= 0.95,
          fmtn("%d/%d first inner runs converged within 50 iterations (%.0f%%, need 95%%); "
               "median %d, p95 %d",
               ok, total, 100 * frac, iters[iters.size() / 2], iters[iters.size() * 95 / 100])};
}

Outcome feasibility_slackness(const RunOutput& out) {
  const double t_db = -11.0;
  int feasible = 0, over = 0;
  double worst_excess = -1e9, worst_slack = 0.0;
  for (const auto& r : out.rows) {
    if (r.trial >= 50) continue;
    if (!r.feasible) continue;
    ++feasible;
    worst_excess = std::max(worst_excess, r.mse_achieved_db - t_db);
    if (r.mse_achieved_db > t_db + 0.5) ++over;
    // nu |MSE - T| / (1 + nu) with MSE and T in normalized linear units.
    worst_slack = std::max(worst_slack, r.slackness);
  }
  return {feasible > 0 && over == 0 && worst_slack <= 1e-3,
          fmtn("%d/50 feasible; max achieved - T = %+.2f dB (limit +0.5); max "
               "nu|MSE-T|/(1+nu) = %.1e (limit 1e-3)",
               feasible, worst_excess, worst_slack)};
}

// ---------------------------------------------------------------- 9
Outcome tradeoff() {
  const ExperimentConfig cfg = parse_config(R"({
    "n_trials": 50, "seed": 909, "methods": ["rs", "no_rs", "rs_no_ecm"],
    "t_mse_db": [-13, -11, -9, -7, -5]
  })");
  const RunOutput out = run_experiment(cfg);
  std::ostringstream msg;
  bool monotone = true, beats_no_rs = true, beats_no_ecm = true;
  for (Method m : cfg.methods) {
    msg << method_name(m) << " [";
    for (std::size_t i = 0; i < cfg.t_mse_db.size(); ++i) {
      const MeanSe s = mean_sd(se_of(out, m, static_cast<int>(i)));
      msg << (i ? " " : "") << fmt("%.3f", s.mean);
      if (i > 0) {
        const MeanSe prev = mean_sd(se_of(out, m, static_cast<int>(i - 1)));
        if (s.mean < prev.mean - pooled_se(s, prev)) monotone = false;
      }
    }
    msg << "] ";
  }
  for (std::size_t i = 0; i < cfg.t_mse_db.size(); ++i) {
    const double rs = mean_sd(se_of(out, Method::Rs, static_cast<int>(i))).mean;
    if (rs < mean_sd(se_of(out, Method::NoRs, static_cast<int>(i))).mean) beats_no_rs = false;
    if (cfg.t_mse_db[i] <= -9.0 &&
        rs < mean_sd(se_of(out, Method::RsNoEcm, static_cast<int>(i))).mean)
      beats_no_ecm = false;
  }
  msg << "(i) " << (monotone ? "ok" : "violated") << ", (ii) " << (beats_no_rs ? "ok" : "violated")
      << ", (iii) " << (beats_no_ecm ? "ok" : "violated");
  return {monotone && beats_no_rs && beats_no_ecm, msg.str()};
}

// ---------------------------------------------------------------- 10
Outcome sidelobe() {
  const ExperimentConfig cfg =
      parse_config(R"({"n_trials": 50, "seed": 1010, "methods": ["radar_only"]})");
  const RunOutput out = run_experiment(cfg);
  std::vector<double> v;
  for (const auto& r : out.rows) v.push_back(r.sidelobe_db);
  const MeanSe s = mean_sd(v);
  return {s.mean <= -8.0,
          fmtn("mean sidelobe suppression %.2f dB (sd %.2f) over %d trials, limit -8 dB",
               s.mean, s.sd, s.n)};
}

// ---------------------------------------------------------------- 11
Outcome scnr_variant() {
  const ExperimentConfig cfg = parse_config(R"({
    "n_trials": 50, "seed": 1111, "methods": ["rs"], "sweep": "scnr",
    "t_scnr_db": [0, 5, 10, 15, 20]
  })");
  const RunOutput out = run_experiment(cfg);
  int feasible = 0, short_of = 0;
  double worst = 1e9;
  for (const auto& r : out.rows) {
    if (!r.feasible) continue;
    ++feasible;
    worst = std::min(worst, r.mse_achieved_db - r.t_mse_db);
    if (r.mse_achieved_db < r.t_mse_db - 0.2) ++short_of;
  }
  bool monotone = true;
  std::ostringstream means;
  for (std::size_t i = 0; i < cfg.t_scnr_db.size(); ++i) {
    const MeanSe s = mean_sd(se_of(out, Method::Rs, static_cast<int>(i)));
    means << (i ? " " : "") << fmt("%.3f", s.mean);
    if (i > 0) {
      const MeanSe prev = mean_sd(se_of(out, Method::Rs, static_cast<int>(i - 1)));
      if (s.mean > prev.mean + pooled_se(s, prev)) monotone = false;
    }
  }
  return {short_of == 0 && monotone,
          fmtn("%d/250 feasible, min achieved - T = %+.2f dB (limit -0.2); mean SE [%s] %s",
               feasible, worst, means.str().c_str(),
               monotone ? "non-increasing" : "increases")};
}

// ---------------------------------------------------------------- 12
std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome determinism() {
  ExperimentConfig cfg = parse_config(R"({
    "n_trials": 6, "seed": 1212, "t_mse_db": [-11, -7], "solver": {"t_max": 60}
  })");
  const auto base = std::filesystem::temp_directory_path() / "fddisac_acceptance_det";
  std::filesystem::remove_all(base);
  std::vector<std::string> csv;
  for (int workers : {1, 1, 3}) {
    cfg.workers = workers;
    const auto dir = base / std::to_string(csv.size());
    std::filesystem::create_directories(dir);
    write_outputs(cfg, run_experiment(cfg), dir.string());
    csv.push_back(read_file(dir / "results.csv"));
  }
  std::filesystem::remove_all(base);
  const bool same = !csv[0].empty() && csv[0] == csv[1] && csv[0] == csv[2];
  return {same, fmtn("three runs (1, 1, 3 workers): results.csv %s (%zu bytes)",
                     same ? "byte-identical" : "DIFFER", csv[0].size())};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  RunOutput headline;
  bool have_headline = false;
  auto need_headline = [&]() -> const RunOutput& {
    if (!have_headline) {
      headline = headline_run();
      have_headline = true;
    }
    return headline;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", 10, gradient_check},
      {2, "eigen oracle", 5, eigen_oracle},
      {3, "block-form equivalence", 5, block_equivalence},
      {4, "NOMP recovery", 60, nomp_recovery},
      {5, "observed FIM", 30, fim_check},
      {6, "ECM calibration", 300, ecm_calibration},
      {7, "convergence", 600, [&] { return convergence(need_headline()); }},
      {8, "feasibility + slackness", 600, [&] { return feasibility_slackness(need_headline()); }},
      {9, "trade-off ordering", 1800, tradeoff},
      {10, "sidelobe suppression", 600, sidelobe},
      {11, "SCNR variant", 1200, scnr_variant},
      {12, "determinism", 120, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %2d %-24s %s; %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), secs, c.limit_s, in_time ? "" : " TOO SLOW");
    std::fflush(stdout);
  }
  return failures;
}
