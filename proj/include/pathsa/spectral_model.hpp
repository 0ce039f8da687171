#pragma once

// Synthetic ground truth: a truncated Mercer eigen-system on [0,1] with the
// uniform marginal, a regression function with a prescribed source condition,
// and bounded uniform noise. Every norm below is exact for the truncated model.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pathsa/text_format.hpp"

namespace pathsa {

using Rng = std::mt19937_64;

enum class Basis {
  // phi_0 = 1, phi_k(x) = sqrt(2) cos(pi k x); orthonormal for Lebesgue on [0,1].
  kCosine,
};

class EigenSystem {
 public:
  explicit EigenSystem(Eigen::VectorXd eigenvalues, Basis basis = Basis::kCosine);

  /// mu_k = (k+1)^-decay, k < modes.
  static EigenSystem power_law(std::size_t modes, double decay);

  std::size_t modes() const { return static_cast<std::size_t>(mu_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return mu_; }
  double eigenvalue(std::size_t k) const { return mu_[static_cast<Eigen::Index>(k)]; }
  double trace() const { return trace_; }
  Basis basis() const { return basis_; }

  /// Writes phi_0(x) .. phi_{N-1}(x) into out (size N).
  void basis_values(double x, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd basis_values(double x) const;

 private:
  Eigen::VectorXd mu_;
  double trace_;
  Basis basis_;
};

/// Coefficients a_alpha of f = sum_alpha a_alpha phi_alpha.
struct SpectralVector {
  Eigen::VectorXd coeffs;

  static SpectralVector zeros(std::size_t n) { return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))}; }
  std::size_t size() const { return static_cast<std::size_t>(coeffs.size()); }
};

struct Sample {
  double x;
  double y;
};

/// Knobs of the power-law reference family.
struct ModelParams {
  std::size_t modes = 256;
  double mu_decay = 2.0;      // mu_k = (k+1)^-mu_decay
  double source_decay = 1.0;  // g_k = (k+1)^-source_decay
  double r = 1.0;             // f_rho = L_K^r g
  double sigma = 0.5;         // noise uniform on [-sigma, sigma]

  std::string to_text() const;
  /// Applies one model key; false if the key is not a model key.
  bool set(const KeyValue& kv);
  static ModelParams from_text(std::string_view text);
  void validate() const;
};

class SpectralModel {
 public:
  /// f_rho = sum mu_alpha^r g_alpha phi_alpha.
  SpectralModel(EigenSystem eigen, double r, Eigen::VectorXd source_coeffs, double sigma);

  static SpectralModel from_params(const ModelParams& params);

  /// Builds a model from regression coefficients c directly, with g = mu^-r c.
  static SpectralModel from_regression(EigenSystem eigen, double r, Eigen::VectorXd regression,
                                       double sigma);

  const EigenSystem& eigen() const { return eigen_; }
  std::size_t modes() const { return eigen_.modes(); }
  const Eigen::VectorXd& mu() const { return eigen_.eigenvalues(); }
  double regularity() const { return r_; }
  const Eigen::VectorXd& source_coeffs() const { return g_; }
  const SpectralVector& regression() const { return f_rho_; }
  double noise_halfwidth() const { return sigma_; }
  double M_rho() const { return M_rho_; }
  double kappa() const { return kappa_; }
  double kappa_sq() const { return kappa_ * kappa_; }

  /// ||L_K^{-s} f_rho||_rho; exact on the truncated system for every real s.
  double source_norm(double s) const;
  /// ||L_K^{-r} f_rho||_rho = ||g||.
  double source_norm_r() const { return source_norm_r_; }

  /// Mass sum_{alpha >= N} c_alpha^2 the truncation drops from the untruncated
  /// power-law family. Zero for models not built from ModelParams.
  double truncation_tail() const { return truncation_tail_; }

  /// Maximum of K(x,x) and |f_rho(x)| on the certification grid.
  double grid_kernel_diag_max() const { return grid_kdiag_max_; }
  double grid_regression_max() const { return grid_freg_max_; }

  static constexpr std::size_t kCertificationGrid = 10000;

 private:
  double compute_source_norm(double s) const;

  EigenSystem eigen_;
  double r_;
  Eigen::VectorXd g_;
  SpectralVector f_rho_;
  double sigma_;
  double M_rho_ = 0.0;
  double kappa_ = 0.0;
  double source_norm_r_ = 0.0;
  double source_norm_1_ = 0.0;
  double source_norm_32_ = 0.0;
  double truncation_tail_ = 0.0;
  double grid_kdiag_max_ = 0.0;
  double grid_freg_max_ = 0.0;
};

/// Truncated Mercer series K(x, x2) = sum mu_alpha phi_alpha(x) phi_alpha(x2).
double kernel_eval(const SpectralModel& model, double x, double x2);

/// Pointwise value of a truncated expansion. Throws DimensionError on mismatch.
double eval_function(const SpectralModel& model, const SpectralVector& f, double x);

double norm_rho(const SpectralVector& f);

/// RKHS norm (sum a_alpha^2 / mu_alpha)^{1/2}.
double norm_K(const SpectralModel& model, const SpectralVector& f);

/// L_K^{1/2} f: coefficients scaled by sqrt(mu_alpha).
SpectralVector scale_by_sqrt_mu(const SpectralModel& model, const SpectralVector& f);

/// x ~ U[0,1], y = f_rho(x) + U[-sigma, sigma]. Advances rng by two uniform draws.
Sample draw_sample(const SpectralModel& model, Rng& rng);

/// Same as draw_sample, also returning phi(x) so callers avoid recomputing it.
Sample draw_sample(const SpectralModel& model, Rng& rng, Eigen::Ref<Eigen::VectorXd> phi_out);

}  // namespace pathsa
