#include "fddisac/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fddisac/baselines.hpp"
#include "fddisac/ecm.hpp"
#include "fddisac/scnr.hpp"
#include "fddisac/sensing.hpp"

namespace fddisac {

namespace {

constexpr double kDeg = kPi / 180.0;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Downlink receiver noise; the SNR axis is P / sigma^2.
constexpr double kNoiseVar = 1.0;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int method_rank(const ExperimentConfig& cfg, Method m) {
  const auto it = std::find(cfg.methods.begin(), cfg.methods.end(), m);
  return static_cast<int>(it - cfg.methods.begin());
}

}  // namespace

TrialChannels draw_trial(const ExperimentConfig& cfg, int trial) {
  SystemGeometry geom = cfg.geometry;
  geom.noise_var_ul = db_to_linear(-cfg.ul_snr_db);
  ScenarioConfig scen = cfg.scenario;
  scen.eta = cfg.eta_reciprocity;
  NompConfig nomp = cfg.nomp;
  nomp.noise_var = geom.noise_var_ul;
  const int s = geom.center_subcarrier();

  Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(trial));
  TrialChannels out;
  out.trial = trial;
  for (int k = 0; k < cfg.users; ++k) {
    const UserChannel user = draw_user_channel(geom, scen, rng);
    const UlObservation obs = simulate_ul_observation(geom, user, rng, k);
    const std::vector<PathParams> dl = make_dl_params(user, rng);
    out.h_true.push_back(channel_vector(geom, dl, Band::Dl, s));
    const ReconstructedChannel rc = reconstruct_channel(
        obs, geom, nomp, cfg.eta_reciprocity, user.sigma_path_sq, s, cfg.ecm);
    out.h_hat.push_back(rc.h_hat);
    out.ecm_diag.push_back(rc.ecm.diag);
    out.ecm_regularized += rc.ecm.regularized ? 1 : 0;
    out.ecm_clamped += rc.ecm.clamp_events;
  }
  return out;
}

SweepPoint sweep_point(const ExperimentConfig& cfg, int index) {
  const auto& points = cfg.sweep_points();
  if (index < 0 || index >= static_cast<int>(points.size()))
    throw InvalidArgument("sweep point index out of range");
  SweepPoint p;
  p.index = index;
  p.snr_db = cfg.snr_db.front();
  p.t_mse_db = cfg.t_mse_db.front();
  p.t_scnr_db = cfg.t_scnr_db.front();
  switch (cfg.sweep) {
    case Sweep::Tmse: p.t_mse_db = points[index]; break;
    case Sweep::Snr: p.snr_db = points[index]; break;
    case Sweep::Scnr: p.t_scnr_db = points[index]; break;
  }
  return p;
}

ResultRow run_method(const ExperimentConfig& cfg, Method method,
                     const TrialChannels& ch, const SweepPoint& point) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool scnr_mode = cfg.sweep == Sweep::Scnr;
  const Dims dims{cfg.geometry.n_antennas, cfg.users, cfg.radar_streams};
  const double power = db_to_linear(point.snr_db);
  const double noise_over_p = kNoiseVar / power;

  ResultRow row;
  row.method = method;
  row.point = point.index;
  row.snr_db = point.snr_db;
  row.t_mse_db = scnr_mode ? point.t_scnr_db : point.t_mse_db;
  row.trial = ch.trial;

  try {
    const SinrBlocks eval = build_sinr_blocks(ch.h_hat, ch.ecm_diag, noise_over_p, dims, true);
    const SensingSpec sens =
        make_sensing_spec(cfg.targets_deg, point.t_mse_db, cfg.n_grid, cfg.mainlobe_deg);
    const BeamMatrices beams = beam_matrices(dims.n_antennas, sens, power);

    ScnrSpec scnr_spec;
    scnr_spec.targets = cfg.scnr_targets;
    scnr_spec.clutter = cfg.scnr_clutter;
    scnr_spec.sigma_r_sq = cfg.sigma_r_sq > 0.0 ? cfg.sigma_r_sq : kNoiseVar;
    scnr_spec.t_scnr = db_to_linear(point.t_scnr_db);
    std::vector<double> target_angles = sens.target_angles;
    if (scnr_mode) {
      target_angles.clear();
      for (const auto& r : scnr_spec.targets) target_angles.push_back(r.theta);
    }
    const ScnrMatrices scnr_g = scnr_mode ? build_scnr(dims, scnr_spec, power)
                                          : ScnrMatrices{BlockDiagonal(1, 1), BlockDiagonal(1, 1)};

    const double threshold = scnr_mode ? scnr_spec.t_scnr : sens.t_mse;
    auto achieved = [&](const CVec& p) {
      return scnr_mode ? scnr_g.scnr(p) : mse_r(p, beams, dims.n_blocks()).normalized;
    };
    auto meets = [&](const CVec& p) {
      return scnr_mode ? achieved(p) >= threshold : achieved(p) <= threshold;
    };

    auto solve_on = [&](const SinrBlocks& design, bool use_rs, bool radar_only) {
      SolverConfig sc = cfg.solver;
      sc.power = power;
      sc.use_rs = use_rs;
      sc.radar_only = radar_only;
      const CVec p0 = initial_precoder(ch.h_hat, dims, target_angles, use_rs);
      return scnr_mode ? solve_scnr(design, scnr_g, scnr_spec, sc, p0)
                       : solve(design, beams, sens, sc, p0);
    };

    SolveResult res;
    bool solved = true;
    switch (method) {
      case Method::Rs:
      case Method::RsNoEcm: {
        const SinrBlocks no_ecm =
            method == Method::RsNoEcm
                ? build_sinr_blocks(ch.h_hat, ch.ecm_diag, noise_over_p, dims, false)
                : SinrBlocks{};
        const SinrBlocks& design = method == Method::Rs ? eval : no_ecm;
        res = solve_on(design, true, false);
        // Zero common power is a valid rate-splitting precoder; keep the
        // private-only solution when the split run ends up worse.
        const SolveResult alt = solve_on(design, false, false);
        const double se_rs = se_lower_bound(res.p, design).sum;
        const double se_alt = se_lower_bound(alt.p, design).sum;
        const bool take_alt = (alt.feasible && !res.feasible) ||
                              (alt.feasible == res.feasible && se_alt > se_rs);
        const int iters = res.total_inner_iters + alt.total_inner_iters;
        if (take_alt) {
          const int first = res.first_inner_iters;
          const bool first_conv = res.first_inner_converged;
          const int viol = res.ascent_violations + alt.ascent_violations;
          res = alt;
          res.first_inner_iters = first;
          res.first_inner_converged = first_conv;
          res.ascent_violations = viol;
          row.fallback = true;
        }
        res.total_inner_iters = iters;
        break;
      }
      case Method::NoRs:
        res = solve_on(eval, false, false);
        break;
      case Method::RadarOnly:
        res = solve_on(eval, true, true);
        break;
      case Method::Mrt:
        res.p = mrt_precoder(ch.h_hat, dims);
        solved = false;
        break;
      case Method::Rzf:
        res.p = rzf_precoder(ch.h_hat, dims, noise_over_p);
        solved = false;
        break;
    }

    const RateSet rates = se_lower_bound(res.p, eval);
    row.se_sum = rates.sum;
    row.se_common = rates.common;
    row.se_genie = se_actual_mc(res.p, ch.h_true, dims, noise_over_p).sum;
    const double value = achieved(res.p);
    row.mse_achieved_db = linear_to_db(value);
    if (solved) {
      row.nu_star = res.nu_star;
      row.iters = res.total_inner_iters;
      row.feasible = res.feasible;
      row.first_inner_iters = res.first_inner_iters;
      row.first_inner_converged = res.first_inner_converged;
      row.ascent_violations = res.ascent_violations;
      const double gap = std::abs(value - threshold) / (scnr_mode ? threshold : 1.0);
      row.slackness = res.nu_star * gap / (1.0 + res.nu_star);
    } else {
      row.feasible = meets(res.p);
    }

    const BeamPattern pattern = beam_pattern(res.p, dims.n_antennas, power,
                                             pattern_angles(cfg.pattern_grid_deg));
    row.sidelobe_db = sidelobe_suppression(pattern, target_angles,
                                           cfg.sidelobe_halfwidth_deg * kDeg);
    const double peak = *std::max_element(pattern.gain.begin(), pattern.gain.end());
    row.pattern.resize(pattern.gain.size());
    for (std::size_t u = 0; u < pattern.gain.size(); ++u)
      row.pattern[u] = peak > 0.0 ? pattern.gain[u] / peak : 0.0;
    if (cfg.dump_precoders) row.precoder = res.p;
  } catch (const std::exception& e) {
    row.error = true;
    row.error_message = e.what();
    row.se_sum = row.se_common = row.se_genie = kNan;
    row.mse_achieved_db = row.sidelobe_db = row.nu_star = kNan;
    row.feasible = false;
  }
  if (cfg.timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  }
  return row;
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n_points = static_cast<int>(cfg.sweep_points().size());
  std::vector<std::vector<ResultRow>> per_trial(cfg.n_trials);
  std::vector<TrialChannels> channels(cfg.dump_precoders ? cfg.n_trials : 0);

  std::atomic<int> next{0};
  std::mutex fail_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= cfg.n_trials) return;
      try {
        TrialChannels ch = draw_trial(cfg, t);
        auto& rows = per_trial[t];
        for (int i = 0; i < n_points; ++i) {
          const SweepPoint pt = sweep_point(cfg, i);
          for (Method m : cfg.methods) rows.push_back(run_method(cfg, m, ch, pt));
        }
        if (cfg.dump_precoders) channels[t] = std::move(ch);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_workers = std::max(1, std::min(cfg.workers, cfg.n_trials));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  RunOutput out;
  for (auto& rows : per_trial)
    for (auto& r : rows) out.rows.push_back(std::move(r));
  std::sort(out.rows.begin(), out.rows.end(), [&](const ResultRow& a, const ResultRow& b) {
    const int ma = method_rank(cfg, a.method);
    const int mb = method_rank(cfg, b.method);
    if (ma != mb) return ma < mb;
    if (a.point != b.point) return a.point < b.point;
    return a.trial < b.trial;
  });
  for (const auto& r : out.rows) out.errors += r.error ? 1 : 0;
  out.channels = std::move(channels);
  return out;
}

std::string results_csv(const RunOutput& out) {
  std::ostringstream os;
  os << "method,snr_db,t_mse_db,trial,se_sum,se_common,mse_achieved_db,sidelobe_db,"
        "nu_star,iters,feasible,wall_ms\n";
  for (const auto& r : out.rows) {
    os << method_name(r.method) << ',' << num(r.snr_db) << ',' << num(r.t_mse_db) << ','
       << r.trial << ',' << num(r.se_sum) << ',' << num(r.se_common) << ','
       << num(r.mse_achieved_db) << ',' << num(r.sidelobe_db) << ',' << num(r.nu_star)
       << ',' << r.iters << ',' << (r.feasible ? 1 : 0) << ',' << num(r.wall_ms) << '\n';
  }
  return os.str();
}

namespace {

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    for (double x : v) s.std += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(s.std / static_cast<double>(v.size() - 1));
  }
  return s;
}

// Rows grouped by (method, point) in output order.
std::vector<std::vector<const ResultRow*>> group_rows(const RunOutput& out) {
  std::vector<std::vector<const ResultRow*>> groups;
  for (const auto& r : out.rows) {
    if (groups.empty() || groups.back().front()->method != r.method ||
        groups.back().front()->point != r.point)
      groups.emplace_back();
    groups.back().push_back(&r);
  }
  return groups;
}

}  // namespace

std::string summary_json(const ExperimentConfig& cfg, const RunOutput& out) {
  using nlohmann::json;
  json points = json::array();
  for (const auto& g : group_rows(out)) {
    std::vector<double> se, sec, mse, sl, nu, it;
    int feasible = 0;
    int fallback = 0;
    for (const ResultRow* r : g) {
      if (r->error) continue;
      se.push_back(r->se_sum);
      sec.push_back(r->se_common);
      mse.push_back(r->mse_achieved_db);
      sl.push_back(r->sidelobe_db);
      nu.push_back(r->nu_star);
      it.push_back(r->iters);
      feasible += r->feasible ? 1 : 0;
      fallback += r->fallback ? 1 : 0;
    }
    const ResultRow& head = *g.front();
    const Stats s_se = stats(se);
    const Stats s_mse = stats(mse);
    const Stats s_sl = stats(sl);
    const double n = static_cast<double>(se.size());
    points.push_back({
        {"method", method_name(head.method)},
        {"sweep_value", cfg.sweep_points()[head.point]},
        {"snr_db", head.snr_db},
        {"threshold_db", head.t_mse_db},
        {"n", se.size()},
        {"se_sum_mean", s_se.mean},
        {"se_sum_std", s_se.std},
        {"se_common_mean", stats(sec).mean},
        {"achieved_db_mean", s_mse.mean},
        {"achieved_db_std", s_mse.std},
        {"sidelobe_db_mean", s_sl.mean},
        {"sidelobe_db_std", s_sl.std},
        {"nu_star_mean", stats(nu).mean},
        {"iters_mean", stats(it).mean},
        {"feasible_fraction", n > 0 ? feasible / n : 0.0},
        {"fallback_fraction", n > 0 ? fallback / n : 0.0},
    });
  }
  json root = {
      {"sweep", sweep_name(cfg.sweep)},
      {"n_trials", cfg.n_trials},
      {"seed", cfg.seed},
      {"errors", out.errors},
      {"points", points},
      {"config", json::parse(config_to_json(cfg))},
  };
  return root.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
  f << text;
  f.flush();
  if (!f) throw std::ios_base::failure("write failed for '" + path.string() + "'");
}

nlohmann::json complex_json(const CVec& v) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

}  // namespace

void write_outputs(const ExperimentConfig& cfg, const RunOutput& out,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::ios_base::failure("cannot create output directory '" + out_dir + "'");

  write_file(dir / "results.csv", results_csv(out));
  write_file(dir / "summary.json", summary_json(cfg, out));

  // Trial-mean beam pattern per method and sweep point.
  const std::vector<double> angles = pattern_angles(cfg.pattern_grid_deg);
  std::map<Method, std::ostringstream> files;
  for (const auto& g : group_rows(out)) {
    std::vector<double> mean(angles.size(), 0.0);
    int n = 0;
    for (const ResultRow* r : g) {
      if (r->error || r->pattern.size() != angles.size()) continue;
      for (std::size_t u = 0; u < angles.size(); ++u) mean[u] += r->pattern[u];
      ++n;
    }
    if (n == 0) continue;
    auto& os = files[g.front()->method];
    if (os.tellp() == 0) os << "sweep_value,angle_deg,gain_db\n";
    const double peak = *std::max_element(mean.begin(), mean.end());
    const double value = cfg.sweep_points()[g.front()->point];
    for (std::size_t u = 0; u < angles.size(); ++u) {
      const double rel = peak > 0.0 ? mean[u] / peak : 0.0;
      const double db = rel > 0.0 ? std::max(linear_to_db(rel), kPatternFloorDb)
                                  : kPatternFloorDb;
      os << num(value) << ',' << num(angles[u] / kDeg) << ',' << num(db) << '\n';
    }
  }
  for (auto& [m, os] : files)
    write_file(dir / (std::string("pattern_") + method_name(m) + ".csv"), os.str());

  if (cfg.dump_precoders) {
    std::ostringstream pre;
    for (const auto& r : out.rows) {
      if (r.error) continue;
      nlohmann::json j = {{"method", method_name(r.method)},
                          {"point", r.point},
                          {"snr_db", r.snr_db},
                          {"trial", r.trial},
                          {"se_sum", r.se_sum},
                          {"p", complex_json(r.precoder)}};
      pre << j.dump() << '\n';
    }
    write_file(dir / "precoders.jsonl", pre.str());
    std::ostringstream chan;
    for (const auto& c : out.channels) {
      nlohmann::json h = nlohmann::json::array();
      nlohmann::json e = nlohmann::json::array();
      for (std::size_t k = 0; k < c.h_hat.size(); ++k) {
        h.push_back(complex_json(c.h_hat[k]));
        e.push_back(std::vector<double>(c.ecm_diag[k].data(),
                                        c.ecm_diag[k].data() + c.ecm_diag[k].size()));
      }
      chan << nlohmann::json{{"trial", c.trial}, {"h_hat", h}, {"ecm_diag", e}}.dump()
           << '\n';
    }
    write_file(dir / "channels.jsonl", chan.str());
  }
}

}  // namespace fddisac
