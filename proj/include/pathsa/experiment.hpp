#pragma once

// Replicated runs, finite-sample bound evaluation and log-log rate fits.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathsa/online_learner.hpp"
#include "pathsa/schedule.hpp"
#include "pathsa/spectral_model.hpp"

namespace pathsa {

struct BoundReport {
  std::size_t t = 0;
  char theorem = '?';  // 'B': H_K bound, 'C': L2 bound
  std::vector<std::pair<std::string, double>> constants;
  std::vector<double> terms;  // additive terms of the bound, in order
  double value = 0.0;
  int dominant_term = 0;  // index into terms
  double exponent = 0.0;  // rate exponent of the leading t-dependence
  // L2 bound only: the third-term exponent (4r-1)/(4r+2) used for value, and
  // the variant (6r-1)/(4r+2) with the bound evaluated under it.
  double third_exponent = std::numeric_limits<double>::quiet_NaN();
  double alt_exponent = std::numeric_limits<double>::quiet_NaN();
  double alt_value = std::numeric_limits<double>::quiet_NaN();
  bool in_regime = false;  // schedule satisfies the theorem's preconditions
  double measured = std::numeric_limits<double>::quiet_NaN();
  bool holds = false;      // measured <= value, set by the caller
};

/// ||f_t - f_rho||_K <= C0/tbar + (C1 a^{1/2-r} log(2/delta) + C2 a) tbar^{-(2r-1)/(4r+2)}.
/// RangeError unless r in (1/2, 3/2] and delta in (0, 1).
BoundReport theorem_b_bound(const SpectralModel& model, const Schedule& schedule, std::size_t t, double delta);

/// Three-term L2 bound with D0..D4. RangeError unless r in [1/2, 1] and delta in (0, 1).
BoundReport theorem_c_bound(const SpectralModel& model, const Schedule& schedule, std::size_t t, double delta);

struct RateFit {
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of the log-log fit
  double theoretical_slope = std::numeric_limits<double>::quiet_NaN();
};

/// OLS of log err on log t over points with t in [t_min, t_max]. RangeError
/// with fewer than 4 points in the window or a nonpositive value.
RateFit fit_rate(std::span<const std::pair<double, double>> points, double t_min, double t_max,
                 double theoretical_slope = std::numeric_limits<double>::quiet_NaN());

/// Linear interpolation between order statistics (type 7). Copies its input.
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

struct ExperimentConfig {
  std::size_t horizon = 0;
  std::size_t replicates = 1;
  std::uint64_t base_seed = 0;  // replicate i uses base_seed + i
  Representation rep = Representation::kSpectral;
  std::vector<std::size_t> checkpoints;  // empty: geometric_checkpoints(horizon)
  double delta = 0.1;
  double fit_t_min = 0.0;  // 0: top half of the checkpoints in log t
  double fit_t_max = 0.0;  // 0: horizon
  unsigned threads = 1;
};

struct SummaryRow {
  std::size_t t;
  double median_err_rho;
  double q_err_rho;  // (1 - delta) quantile
  double median_err_K;
  double q_err_K;
  double bound_B;  // NaN when r is outside the theorem's range
  double bound_C;
  double E_init;  // medians over replicates
  double E_approx;
  double E_drift;
  double E_samp;
};

struct ExperimentResult {
  std::vector<ErrorTrace> traces;  // successful replicates, in seed order
  std::vector<std::pair<std::uint64_t, std::string>> failures;
  std::vector<SummaryRow> summary;
  std::vector<BoundReport> bounds_B;  // per checkpoint, measured = q_err_K
  std::vector<BoundReport> bounds_C;  // per checkpoint, measured = q_err_rho
  bool fit_ok = false;
  RateFit fit_rho;
  RateFit fit_K;
  std::string fit_error;
};

/// Runs the replicates (in parallel across cfg.threads), aggregates
/// per-checkpoint statistics, evaluates both bounds and fits rates in both
/// norms. Deterministic given the model, schedule and config.
ExperimentResult run_replicates(const SpectralModel& model, const Schedule& schedule, const ExperimentConfig& cfg);

/// traces/<seed>.csv, summary.csv, ratefit.txt and, when replicates failed,
/// failures.txt under dir.
void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir);

/// Trace CSV: t, err_rho, err_K, rem_rho, rem_K, fnorm_K, gamma, lambda and,
/// with `components`, E_init, E_approx, E_drift, E_samp, E_samp_direct.
std::string trace_csv(const ErrorTrace& trace, bool components);

}  // namespace pathsa
