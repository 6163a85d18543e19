#pragma once

// CSV and JSON persistence for Monte Carlo runs and theory curves. Doubles
// are written in shortest round-trip form, so identical runs give identical
// bytes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l1lab/experiment.hpp"

namespace l1lab {

std::string format_double(double x);

/// trial_id,T,M,N,kind,profile,seed,K_c,K_1..K_T,solves,wall_time_s
/// wall_time_s is left empty unless `timing` is set; flagged trials carry
/// K_c = -1 so they cannot be mistaken for valid rows.
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool timing);

/// One row per DensityEstimate; per-block vectors are ';'-separated.
void write_estimates_csv(std::ostream& out, const std::vector<DensityEstimate>& estimates);
/// Throws FormatError on a malformed file.
std::vector<DensityEstimate> read_estimates_csv(std::istream& in);

/// "kind/profile/T<T>", the grouping key for fits.
std::string series_key(const DensityEstimate& e);

/// one_over_N,rho_c_mean,stderr,series
void write_fig2_csv(std::ostream& out, const std::vector<DensityEstimate>& estimates);

struct CurvePoint {
  double alpha = 0.0;
  double uniform = 0.0;
  std::optional<double> localized;  ///< only where 1/alpha is an integer >= 2
};

/// alpha,rho_c_theory_uniform,rho_c_theory_localized
void write_fig1_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

struct SeriesSummary {
  std::string key;
  std::vector<DensityEstimate> estimates;
  std::optional<ThresholdFit> fit;
  std::optional<double> theory;
};

/// Aggregate manifest: config echo (a JSON document), master seed, per-series
/// estimates and fits, software version and a UTC timestamp.
void write_manifest(std::ostream& out, const std::string& config_json, std::uint64_t seed,
                    const std::vector<SeriesSummary>& series, const std::string& timestamp);

/// Reads back the "theory" values of a manifest keyed by series.
std::vector<std::pair<std::string, double>> read_manifest_theory(std::istream& in);

}  // namespace l1lab
