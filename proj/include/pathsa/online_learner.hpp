#pragma once

// Online regularized least squares in an RKHS:
//   f_t = (1 - gamma_t lambda_t) f_{t-1} - gamma_t (f_{t-1}(x_t) - y_t) K_{x_t},  f_0 = 0,
// as a growing kernel expansion (nodal) or in eigen-coordinates (spectral).

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pathsa/decomposition.hpp"
#include "pathsa/error.hpp"
#include "pathsa/schedule.hpp"
#include "pathsa/spectral_model.hpp"

namespace pathsa {

/// f_t = scale * sum_i coeffs[i] K(support[i], .)
struct NodalState {
  std::vector<double> support;
  std::vector<double> coeffs;
  double scale = 1.0;
  std::size_t t = 0;
  double norm_K_sq = 0.0;  // ||f_t||_K^2, updated incrementally

  /// Folds scale into coeffs; afterwards scale == 1.
  void finalize();

  template <class Kernel>
  double evaluate(const Kernel& kernel, double x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) acc += coeffs[i] * kernel(support[i], x);
    return scale * acc;
  }
};

struct SpectralState {
  SpectralVector f;
  std::size_t t = 0;

  explicit SpectralState(std::size_t modes) : f(SpectralVector::zeros(modes)) {}
};

inline constexpr std::size_t kScaleFoldInterval = 1024;

namespace detail {
inline void check_step(double gamma, double lambda) {
  if (!(gamma >= 0.0) || !(lambda >= 0.0)) throw RangeError("step sizes must be nonnegative");
  if (gamma * lambda >= 1.0) throw DivergenceError("gamma * lambda >= 1: the step no longer contracts");
}
}  // namespace detail

/// One step of the recursion. Returns f_{t-1}(x_t). O(t) kernel evaluations.
template <class Kernel>
double step_nodal(NodalState& s, const Kernel& kernel, const Sample& z, double gamma, double lambda) {
  detail::check_step(gamma, lambda);
  const double pred = s.evaluate(kernel, z.x);
  const double shrink = 1.0 - gamma * lambda;
  const double beta = -gamma * (pred - z.y);
  s.norm_K_sq = shrink * shrink * s.norm_K_sq + 2.0 * shrink * beta * pred + beta * beta * kernel(z.x, z.x);
  s.scale *= shrink;
  if (!(s.scale > 0.0)) throw DivergenceError("nodal scale underflowed");
  s.support.push_back(z.x);
  s.coeffs.push_back(beta / s.scale);
  ++s.t;
  if (s.t % kScaleFoldInterval == 0) s.finalize();
  return pred;
}

/// Truncated Mercer kernel with memoized features sqrt(mu) * phi(x). Not thread-safe.
class MercerKernel {
 public:
  explicit MercerKernel(const SpectralModel& model) : model_(&model) {}
  double operator()(double x, double x2) const { return features(x).dot(features(x2)); }
  const Eigen::VectorXd& features(double x) const;

 private:
  const SpectralModel* model_;
  mutable std::unordered_map<double, Eigen::VectorXd> cache_;
};

/// Spectral coefficients of a nodal iterate, O(tN).
SpectralVector to_spectral(const NodalState& s, const MercerKernel& kernel, const SpectralModel& model);

/// a <- (1 - gamma lambda) a - gamma (f_{t-1}(x_t) - y_t) mu o phi(x_t). Returns f_{t-1}(x_t).
double step_spectral(SpectralState& s, const SpectralModel& model, const Sample& z, const Eigen::VectorXd& phi,
                     double gamma, double lambda);
double step_spectral(SpectralState& s, const SpectralModel& model, const Sample& z, double gamma, double lambda);

enum class Representation { kNodal, kSpectral };

std::string_view representation_name(Representation rep);
Representation parse_representation(std::string_view name);  // RangeError otherwise

/// {0} + round(start 2^(k/per_octave)) <= T + {T}.
std::vector<std::size_t> geometric_checkpoints(std::size_t T, double start = 64.0, int per_octave = 4);

struct RunOptions {
  Representation rep = Representation::kSpectral;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> checkpoints;  // empty: geometric_checkpoints(horizon)
  bool track_sample = true;              // direct sample-term accumulation (spectral only)
};

struct TraceRow {
  std::size_t t;
  double err_rho;   // ||f_t - f_rho||_rho
  double err_K;
  double rem_rho;   // ||f_t - f_lambda_t||_rho
  double rem_K;
  double fnorm_K;   // ||f_t||_K
  double gamma;
  double lambda;
  ErrorComponents comp;  // rho norm
};

struct ErrorTrace {
  std::uint64_t seed = 0;
  Representation rep = Representation::kSpectral;
  std::vector<TraceRow> rows;
  SpectralVector final_f;

  // ||f_t||_K <= kappa M_rho / lambda_t, checked every step when the schedule
  // is in the contraction regime.
  bool iterate_bound_checked = false;
  std::size_t iterate_bound_violations = 0;
  double max_iterate_bound_ratio = 0.0;
  std::size_t contraction_violations = 0;  // steps with 1 - gamma lambda outside (0, 1)
};

/// Deterministic given (model, schedule, options). RangeError for checkpoints
/// that are not strictly increasing or exceed the horizon.
ErrorTrace run(const SpectralModel& model, const Schedule& schedule, const RunOptions& options);

}  // namespace pathsa
