#pragma once

// Tikhonov regularization path f_lambda = (L_K + lambda I)^{-1} L_K f_rho in
// eigen-coordinates, its drift, and the five drift inequalities along it.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathsa/spectral_model.hpp"

namespace pathsa {

enum class Norm { kRho, kK };

struct PathPoint {
  double lambda;
  SpectralVector f_lambda;
  double approx_err_rho;  // ||f_lambda - f_rho||_rho
  double approx_err_K;    // ||f_lambda - f_rho||_K
};

/// Coefficients c_alpha mu_alpha / (mu_alpha + lambda). lambda = 0 gives f_rho.
SpectralVector path_coefficients(const SpectralModel& model, double lambda);

/// Throws RangeError for lambda <= 0.
PathPoint tikhonov_solution(const SpectralModel& model, double lambda);

/// ||(L_K + lambda I) f_lambda - L_K f_rho||_rho.
double tikhonov_residual(const SpectralModel& model, const PathPoint& point);

/// ||f_lambda - f_mu|| in the requested norm; mu = 0 is the approximation error.
double drift(const SpectralModel& model, double lambda, double mu, Norm norm);

enum class DriftClause { A, B, C, D, E };

char clause_letter(DriftClause c);
DriftClause parse_clause(char letter);  // RangeError on anything but A..E
Norm clause_norm(DriftClause c);        // A, B: rho; C, D, E: K
bool clause_valid(DriftClause c, double r);

struct DriftQuery {
  double lambda;
  double mu;
  double r;
  DriftClause clause;
  // Clauses B and E take 1 <= s <= r and 3/2 <= s <= r respectively;
  // unset means the lower endpoint.
  std::optional<double> s = std::nullopt;
};

/// Right-hand side of the chosen drift inequality. The pair is ordered so that
/// the larger of (lambda, mu) plays the role of lambda. Throws RangeError when
/// r (or s) is outside the clause's range or a parameter is negative.
double drift_bound(const SpectralModel& model, const DriftQuery& q);

struct DriftCheck {
  DriftQuery query;
  double measured;
  double bound;
  bool pass;  // measured <= bound * (1 + kDriftSlack)
};

inline constexpr double kDriftSlack = 1e-9;

std::vector<DriftCheck> verify_drift_inequalities(const SpectralModel& model,
                                                  std::span<const DriftQuery> grid);

/// lambda, mu in {2^-k}, k = 1..kmax, every r in rs, every clause valid for r.
std::vector<DriftQuery> default_drift_grid(std::span<const double> rs, int kmax = 10);

}  // namespace pathsa
