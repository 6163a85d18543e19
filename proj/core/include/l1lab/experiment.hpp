#pragma once

// Incremental-insertion Monte Carlo estimate of the critical density and its
// finite-size extrapolation.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "l1lab/density_profile.hpp"
#include "l1lab/dictionary.hpp"

namespace l1lab {

struct TrialParams {
  DictionaryKind kind = DictionaryKind::concat_orthogonal;
  int T = 2;
  int M = 8;
  DensityProfile profile = DensityProfile::uniform(2);
};

struct TrialRecord {
  int trial_id = 0;
  int T = 0, M = 0, N = 0;
  DictionaryKind kind = DictionaryKind::concat_orthogonal;
  std::string profile;
  std::uint64_t seed = 0;
  int K_c = 0;                            ///< nonzeros at first failure, minus one
  std::vector<int> block_counts;          ///< K_t at the first failure
  int solve_count = 0;
  double wall_time = 0.0;                 ///< seconds
  bool flagged = false;                   ///< solver did not reach optimality
  std::string flag_reason;
};

/// One trial: build a dictionary, then add standard-Gaussian nonzeros one at a
/// time (block t with probability proportional to rho_t among blocks with room,
/// coordinate uniform among that block's zeros), re-solving basis pursuit from
/// scratch each time until recovery first fails. A trial that fills every
/// coordinate records K_c = N - 1. A non-optimal LP flags the trial.
TrialRecord run_trial(const TrialParams& params, std::uint64_t seed, int trial_id = 0);

/// SplitMix64 output number trial_id + 1 of the stream started at master.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial_id);

/// Folds a tag into a seed (SplitMix64 finaliser of seed ^ hash(tag)).
std::uint64_t derive_seed(std::uint64_t master, const std::string& tag);

struct DensityEstimate {
  int T = 0, M = 0, N = 0;
  DictionaryKind kind = DictionaryKind::concat_orthogonal;
  std::string profile;
  int trials = 0;                     ///< valid (unflagged) trials
  int flagged = 0;
  double rho_c_mean = 0.0;            ///< mean(K_c) / N
  double rho_c_stderr = 0.0;          ///< sd(K_c / N) / sqrt(trials), 0 for one trial
  Eigen::VectorXd per_block_density;  ///< mean(K_t) / M
  Eigen::VectorXd per_block_stderr;
  Eigen::VectorXd target_density;     ///< w_t (mean(K_c) + 1) / M
  double max_density_z = 0.0;         ///< largest |empirical - target| / stderr
};

struct EstimateRun {
  DensityEstimate estimate;
  std::vector<TrialRecord> records;   ///< in trial_id order, flagged ones included
};

/// Runs `trials` independent trials with seeds trial_seed(seed, id) on
/// `workers` threads (0 = hardware concurrency). Results are independent of
/// the worker count.
EstimateRun estimate_density(const TrialParams& params, int trials, std::uint64_t seed,
                             int workers = 0);

/// True when every block's empirical density is within `z` standard errors of
/// its target, and blocks of zero weight are empty.
bool densities_match(const DensityEstimate& est, double z = 3.0);

struct ThresholdFit {
  double a = 0.0, b = 0.0, c = 0.0;   ///< rho_c(N) = a + b/N + c/N^2
  double residual_rms = 0.0;
  std::vector<std::pair<int, double>> points_used;
};

/// Unweighted least squares on (1, 1/N, 1/N^2). Throws IllConditioned with
/// fewer than three distinct N.
ThresholdFit fit_threshold(const std::vector<std::pair<int, double>>& points);
ThresholdFit fit_threshold(const std::vector<DensityEstimate>& estimates);

}  // namespace l1lab
