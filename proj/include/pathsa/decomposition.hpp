#pragma once

// Four-way split of f_t - f_rho along the deterministic, mode-diagonal
// products (1 - gamma_i (mu_alpha + lambda_i)):
//   f_t - f_lambda_t = init + sample - drift,  f_lambda_t - f_rho = approx.

#include <cstddef>

#include <Eigen/Dense>

#include "pathsa/reg_path.hpp"
#include "pathsa/schedule.hpp"
#include "pathsa/spectral_model.hpp"

namespace pathsa {

struct ErrorComponents {
  double init = 0.0;
  double approx = 0.0;
  double drift = 0.0;
  double samp = 0.0;         // from the identity, ||r_t - init + drift||
  double samp_direct = 0.0;  // accumulated sum gamma_j Pi_{j+1}^t chi_j; NaN if not tracked
  bool valid = true;         // false for K-norm components outside the contraction regime
};

/// Carries init, drift and (optionally) the sample term forward one step at a
/// time, O(N) per step.
class DecompositionTracker {
 public:
  DecompositionTracker(const SpectralModel& model, const Schedule& schedule, bool track_sample);

  /// Step t. f_prev are the coefficients of f_{t-1}, phi the basis at x_t and
  /// pred = f_{t-1}(x_t). f_prev and phi are ignored unless the sample term is tracked.
  void advance(double gamma, double lambda, const Eigen::VectorXd& f_prev, const Eigen::VectorXd& phi,
               double pred, double y);
  /// Step t without sample-term data.
  void advance(double gamma, double lambda);

  ErrorComponents components(const Eigen::VectorXd& f_t, Norm norm = Norm::kRho) const;

  std::size_t t() const { return t_; }
  bool tracks_sample() const { return track_sample_; }
  const Eigen::VectorXd& path_point() const { return path_; }

 private:
  double measure(const Eigen::VectorXd& v, Norm norm) const;

  const SpectralModel* model_;
  bool contraction_ok_;
  bool track_sample_;
  std::size_t t_ = 0;
  Eigen::ArrayXd mu_;
  Eigen::ArrayXd c_;
  Eigen::VectorXd path_;
  Eigen::VectorXd init_;
  Eigen::VectorXd drift_;
  Eigen::VectorXd sample_;
};

/// Standalone evaluation at step t for iterate f_t, recomputing the per-mode
/// products from scratch (O(tN)). samp_direct is NaN.
ErrorComponents decompose_errors(const SpectralModel& model, const Schedule& schedule,
                                 const SpectralVector& f_t, std::size_t t, Norm norm = Norm::kRho);

}  // namespace pathsa
