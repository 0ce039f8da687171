#pragma once

// Tail bounds for bounded martingale difference sequences in Hilbert space and
// a Monte Carlo check of the uniform-in-k deviation radius.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathsa/schedule.hpp"
#include "pathsa/spectral_model.hpp"

namespace pathsa {

/// 2 exp(-sigma^2/M^2 g(M eps / sigma^2)), g(x) = (1+x) log(1+x) - x, clamped to [0,1].
double bennett_tail(double M, double sigma_sq, double eps);

/// 2 exp(-eps^2 / (2 (sigma^2 + M eps / 3))), clamped to [0,1].
double bernstein_tail(double M, double sigma_sq, double eps);

/// 2 (M/3 + sigma_t) log(2/delta). RangeError unless delta in (0,1) and M, sigma_t >= 0.
double high_prob_radius(double M, double sigma_t, double delta);

struct DeclaredBounds {
  std::vector<double> step_bound;  // ||xi_j|| <= step_bound[j-1]
  double M;                        // max step bound
  double sigma_t;                  // (sum E_{j-1} ||xi_j||^2)^{1/2} upper bound
};

struct MartingaleSpec {
  std::string name;
  std::function<DeclaredBounds(std::size_t t)> declared;
  // Fills xi_1..xi_t for one path.
  std::function<void(Rng& rng, std::size_t t, std::vector<Eigen::VectorXd>& out)> draw;
};

/// Scalar +-M.
MartingaleSpec rademacher_generator(double M = 1.0);
/// Uniform on the sphere of radius M in R^dim.
MartingaleSpec sphere_generator(Eigen::Index dim, double M = 1.0);
/// xi == 0 (declared M = 1, sigma = 0).
MartingaleSpec zero_generator();
/// The learner's sample-error increments xi_j = gamma_j Pi_bar_{j+1}^t chi_j in
/// the rho norm, with ||xi_j|| <= gamma_j kappa (2 kappa^3 M_rho / lambda_{j-1} + 2 kappa M_rho).
/// RangeError unless the schedule is in the contraction regime. The model must
/// outlive the returned spec.
MartingaleSpec learner_generator(const SpectralModel& model, const Schedule& schedule);

struct CoverageResult {
  std::size_t violations = 0;
  std::size_t n_paths = 0;
  double rate = 0.0;
  double upper_limit = 0.0;  // one-sided exact binomial limit at `confidence`
  double radius = 0.0;
  double max_observed_ratio = 0.0;  // max over paths of sup_k ||S_k|| / radius
};

/// Counts paths with sup_{k<=t} ||sum_{i<=k} xi_i|| > radius_scale * high_prob_radius.
/// Path p uses an rng seeded from (seed, p), so the result does not depend on
/// `threads`. Throws SpecViolation when a draw exceeds its declared bound.
CoverageResult coverage_test(const MartingaleSpec& spec, std::size_t t, double delta, std::size_t n_paths,
                             std::uint64_t seed, double radius_scale = 1.0, unsigned threads = 1,
                             double confidence = 0.99);

/// Exact (Clopper-Pearson) one-sided upper limit on a binomial proportion.
double binomial_upper_limit(std::size_t successes, std::size_t trials, double confidence);

}  // namespace pathsa
