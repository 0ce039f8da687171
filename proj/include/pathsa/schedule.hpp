#pragma once

#include <cstddef>
#include <string>

namespace pathsa {

/// gamma_t = a / (t + t0)^theta, lambda_t = b / (t + t0)^(1 - theta).
///
/// The flags record which theorem preconditions hold for the regularity r and
/// kernel bound kappa the schedule was made for. They are advisory: runs with
/// a flag down are allowed, so out-of-regime behaviour can be explored.
struct Schedule {
  double a = 4.0;
  double b = 0.25;
  double theta = 2.0 / 3.0;
  double t0 = 1.0;

  bool thmA_ok = false;        // convergence in H_K (path-following conditions)
  bool thmB_ok = false;        // H_K rate, stated precondition t0^theta >= a kappa^2 + 1
  bool thmB_proof_ok = false;  // H_K rate, precondition used in the proofs, t0^theta >= a (kappa^2 + b)
  bool thmC_ok = false;        // L2 rate, t0^theta >= 2 + 8 kappa^2 a, a >= 4
  bool contraction_ok = false; // t0^theta >= a (kappa^2 + b): contraction and iterate bound

  /// Throws RangeError unless a, b, t0 > 0 and theta in [0, 1].
  static Schedule make(double a, double b, double theta, double t0, double r, double kappa);

  std::string describe() const;
};

struct StepSizes {
  double gamma;
  double lambda;
};

/// Defined for every t >= 0; t = 0 yields lambda_0, the start of the path.
StepSizes schedule_values(const Schedule& s, std::size_t t);

/// theta = 2r / (2r + 1).
double theta_for_regularity(double r);

/// Smallest integer t0 >= 1 meeting the contraction precondition and the
/// precondition of the theorem active for r (L2 theorem for r in [1/2, 1],
/// H_K theorem otherwise).
double minimal_t0(double a, double b, double theta, double kappa, double r);

}  // namespace pathsa
