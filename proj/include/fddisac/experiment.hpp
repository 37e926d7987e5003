#pragma once

#include <string>
#include <vector>

#include "fddisac/config.hpp"
#include "fddisac/eval.hpp"
#include "fddisac/gpi.hpp"

namespace fddisac {

/// Everything one trial needs downstream of UL training.
struct TrialChannels {
  int trial = 0;
  std::vector<CVec> h_true;    ///< DL channels at the reporting subcarrier
  std::vector<CVec> h_hat;     ///< reconstructed DL channels
  std::vector<RVec> ecm_diag;  ///< per-antenna error variances
  int ecm_regularized = 0;     ///< users whose FIM needed a ridge
  int ecm_clamped = 0;         ///< negative ECM diagonals clamped to 0
};

/// UL training, NOMP, DL reconstruction and ECM for every user of a trial.
/// Depends only on (config, trial), never on scheduling.
TrialChannels draw_trial(const ExperimentConfig& cfg, int trial);

/// Operating point of one sweep entry.
struct SweepPoint {
  int index = 0;
  double snr_db = 0.0;
  double t_mse_db = 0.0;   ///< MSE threshold (tmse/snr sweeps)
  double t_scnr_db = 0.0;  ///< SCNR threshold (scnr sweep)
};
SweepPoint sweep_point(const ExperimentConfig& cfg, int index);

/// One row of results.csv plus diagnostics that stay out of the CSV.
struct ResultRow {
  Method method = Method::Rs;
  int point = 0;
  double snr_db = 0.0;
  /// Threshold column: T_mse in dB, or T_scnr in dB for scnr sweeps.
  double t_mse_db = 0.0;
  int trial = 0;
  double se_sum = 0.0;
  double se_common = 0.0;
  /// Achieved normalized MSE in dB, or achieved SCNR in dB for scnr sweeps.
  double mse_achieved_db = 0.0;
  double sidelobe_db = 0.0;
  double nu_star = 0.0;
  int iters = 0;
  bool feasible = false;
  double wall_ms = 0.0;

  double se_genie = 0.0;          ///< SE at the true channels
  int first_inner_iters = 0;
  bool first_inner_converged = false;
  int ascent_violations = 0;
  /// nu |g - T| / (1 + nu): normalized MSE, or SCNR relative to T.
  double slackness = 0.0;
  bool fallback = false;          ///< rate splitting lost to its zero-common candidate
  bool error = false;
  std::string error_message;
  std::vector<double> pattern;    ///< peak-normalized linear beam pattern
  CVec precoder;
};

/// Runs one method at one sweep point on a trial's channels.
ResultRow run_method(const ExperimentConfig& cfg, Method method,
                     const TrialChannels& channels, const SweepPoint& point);

struct RunOutput {
  std::vector<ResultRow> rows;          ///< sorted (method, point, trial)
  std::vector<TrialChannels> channels;  ///< kept only with dump_precoders
  int errors = 0;
};

/// Full Monte-Carlo run over cfg.workers threads.
RunOutput run_experiment(const ExperimentConfig& cfg);

std::string results_csv(const RunOutput& out);
std::string summary_json(const ExperimentConfig& cfg, const RunOutput& out);

/// Writes results.csv, summary.json, pattern_<method>.csv and, with
/// dump_precoders, precoders.jsonl + channels.jsonl. Throws
/// std::ios_base::failure on I/O errors.
void write_outputs(const ExperimentConfig& cfg, const RunOutput& out,
                   const std::string& out_dir);

}  // namespace fddisac
