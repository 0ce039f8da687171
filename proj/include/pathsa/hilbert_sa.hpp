#pragma once

// Stochastic approximation of a linear equation A w = b on a finite sample
// space in R^d. Expectations are finite sums, so the path w_bar_t and both
// remainder decompositions can be checked exactly.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace pathsa {

struct FiniteProblem {
  std::vector<double> probs;           // p_z, z = 0..m-1
  std::vector<Eigen::MatrixXd> A;      // symmetric PSD, d x d
  std::vector<Eigen::VectorXd> b;
  std::vector<double> lambda_seq;      // lambda_0 .. lambda_T
  std::vector<double> gamma_seq;       // index 0 unused, gamma_1 .. gamma_T
  Eigen::VectorXd w0;

  // Set when gamma_t lambda_t = c / (t + t0); enables the closed-form product bound.
  struct ProductRate {
    double c;
    double t0;
  };
  std::optional<ProductRate> product_rate;

  Eigen::Index dim() const { return w0.size(); }
  std::size_t outcomes() const { return probs.size(); }
  std::size_t horizon() const { return gamma_seq.empty() ? 0 : gamma_seq.size() - 1; }

  Eigen::MatrixXd mean_A() const;
  Eigen::VectorXd mean_b() const;

  /// DimensionError on shape mismatch; RangeError on a non-PSD A(z),
  /// probabilities not summing to one, or a nonpositive schedule entry.
  void validate() const;
};

/// A(z) = R Rᵀ with R uniform in [-1,1]^{d x d}, b(z) and w0 uniform in [-1,1]^d,
/// probabilities from normalized uniform weights. Schedule gamma_t = a/(t+1)^{2/3},
/// lambda_t = 1/(t+1)^{1/3} with a = 1 / (max_z ||A(z)|| + 1), so gamma_t ||A_t|| <= 1.
FiniteProblem random_problem(Eigen::Index dim, std::size_t outcomes, std::size_t T, std::uint64_t seed);

struct TrajectoryRecord {
  std::vector<int> draws;                   // z_1 .. z_T at index t-1
  std::vector<Eigen::VectorXd> iterates;    // w_0 .. w_T
  std::vector<Eigen::VectorXd> path;        // w_bar_0 .. w_bar_T
  std::vector<Eigen::VectorXd> remainders;  // r_t = w_t - w_bar_t
};

/// w_t = w_{t-1} - gamma_t ((A(z_t) + lambda_t I) w_{t-1} - b(z_t)). Throws
/// ConditioningError when A_bar + lambda_t I has condition number above 1e12.
TrajectoryRecord iterate(const FiniteProblem& p, std::size_t T, std::uint64_t seed);

/// Same recursion along a prescribed outcome sequence.
TrajectoryRecord iterate_draws(const FiniteProblem& p, const std::vector<int>& draws);

struct DecompositionTerms {
  Eigen::VectorXd init;
  Eigen::VectorXd sample;
  Eigen::VectorXd drift;
};

/// Realized products Pi_j^t = (I - gamma_t A_t(z_t)) ... (I - gamma_j A_j(z_j)):
/// r_t = init - sample - drift.
DecompositionTerms reversed_decomposition_terms(const TrajectoryRecord& rec, const FiniteProblem& p,
                                                std::size_t s, std::size_t t);

/// Deterministic products of (I - gamma_i (A_bar + lambda_i I)):
/// r_t = init + sample - drift.
DecompositionTerms martingale_decomposition_terms(const TrajectoryRecord& rec, const FiniteProblem& p,
                                                  std::size_t s, std::size_t t);

struct ContractionCheck {
  bool precondition_ok;  // gamma_i ||A_i|| <= 1 on [j, t]
  double measured;       // ||Pi_j^t||
  double bound;          // prod (1 - gamma_i lambda_i)
  std::optional<double> closed_form;  // ((j + t0)/(t + t0 + 1))^c
};

/// Realized product. measured = bound = 1 when j > t.
ContractionCheck contraction_bound_check(const TrajectoryRecord& rec, const FiniteProblem& p,
                                         std::size_t j, std::size_t t);

/// Same check for the deterministic products built from A_bar.
ContractionCheck mean_contraction_bound_check(const FiniteProblem& p, std::size_t j, std::size_t t);

/// prod_{i=j}^t (1 - c / (i + t0)).
double telescoped_product(double c, double t0, std::size_t j, std::size_t t);
/// ((j + t0) / (t + t0 + 1))^c.
double closed_form_product_bound(double c, double t0, std::size_t j, std::size_t t);

/// Largest singular value via the symmetric eigenproblem of MᵀM.
double operator_norm(const Eigen::MatrixXd& m);

/// gamma_t = a / (t + t0)^theta_gamma, lambda_t = b / (t + t0)^theta_lambda.
struct PowerLawFamily {
  double a;
  double b;
  double theta_gamma;
  double theta_lambda;
  double t0;
};

struct ConvergenceFlags {
  bool A;        // sum gamma_t lambda_t diverges
  bool B_prime;  // gamma_t / lambda_t -> 0
  bool C_prime;  // ||Delta_t|| / (gamma_t lambda_t) -> 0
};

/// Decay exponent of ||f_{lambda_t} - f_{lambda_{t-1}}||_K for lambda_t ~ t^-theta_lambda:
/// -(r - 1/2) theta_lambda - 1.
double drift_exponent(double r, double theta_lambda);

/// Exponent bookkeeping only. RangeError on a degenerate family.
ConvergenceFlags convergence_flags(const PowerLawFamily& f, double drift_exp);

struct ConvergenceReport {
  ConvergenceFlags flags;
  std::size_t horizon;
  double partial_sum_gl;      // sum_{t<=H} gamma_t lambda_t
  double gamma_over_lambda;   // at t = H
  double drift_over_gl;       // t^drift_exp / (gamma_t lambda_t) at t = H
  double variance_sum;        // S_t = (1 - gamma_t lambda_t)^2 S_{t-1} + gamma_t^2
  double drift_sum;           // D_t = (1 - gamma_t lambda_t) D_{t-1} + t^drift_exp
};

ConvergenceReport check_convergence_conditions(const PowerLawFamily& f, double drift_exp,
                                               std::size_t horizon = 1000000);

}  // namespace pathsa
