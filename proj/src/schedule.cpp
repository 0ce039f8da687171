#include "pathsa/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pathsa/error.hpp"
#include "pathsa/hilbert_sa.hpp"
#include "pathsa/text_format.hpp"

namespace pathsa {

namespace {

constexpr double kRelTol = 1e-12;

bool near(double x, double target) { return std::abs(x - target) <= kRelTol * std::max(1.0, std::abs(target)); }

}  // namespace

Schedule Schedule::make(double a, double b, double theta, double t0, double r, double kappa) {
  if (!(a > 0.0) || !(b > 0.0)) throw RangeError("schedule needs a > 0 and b > 0");
  if (!(theta >= 0.0 && theta <= 1.0)) throw RangeError("schedule needs theta in [0, 1]");
  if (!(t0 > 0.0)) throw RangeError("schedule needs t0 > 0");

  Schedule s;
  s.a = a;
  s.b = b;
  s.theta = theta;
  s.t0 = t0;

  const double k2 = kappa * kappa;
  const double t0_theta = std::pow(t0, theta);
  const bool optimal_theta = near(theta, theta_for_regularity(r));
  const bool ab_one = near(a * b, 1.0);

  s.contraction_ok = t0_theta >= a * (k2 + b);

  const PowerLawFamily family{a, b, theta, 1.0 - theta, t0};
  const ConvergenceFlags conv = convergence_flags(family, drift_exponent(r, 1.0 - theta));
  s.thmA_ok = r >= 0.5 && conv.A && conv.B_prime && conv.C_prime;

  const bool b_regime = r > 0.5 && r <= 1.5 && a >= 1.0 && ab_one && optimal_theta;
  s.thmB_ok = b_regime && t0_theta >= a * k2 + 1.0;
  s.thmB_proof_ok = b_regime && t0_theta >= std::max({a * (k2 + b), b, 1.0});

  s.thmC_ok = r >= 0.5 && r <= 1.0 && a >= 4.0 && ab_one && optimal_theta &&
              t0_theta >= 2.0 + 8.0 * k2 * a;
  return s;
}

std::string Schedule::describe() const {
  std::ostringstream os;
  os << "a=" << format_double(a) << " b=" << format_double(b) << " theta=" << format_double(theta)
     << " t0=" << format_double(t0) << " thmA=" << thmA_ok << " thmB=" << thmB_ok
     << " thmB_proof=" << thmB_proof_ok << " thmC=" << thmC_ok << " contraction=" << contraction_ok;
  return os.str();
}

StepSizes schedule_values(const Schedule& s, std::size_t t) {
  const double tbar = static_cast<double>(t) + s.t0;
  return {s.a / std::pow(tbar, s.theta), s.b / std::pow(tbar, 1.0 - s.theta)};
}

double theta_for_regularity(double r) {
  if (!(r > 0.0)) throw RangeError("regularity must be positive");
  return 2.0 * r / (2.0 * r + 1.0);
}

double minimal_t0(double a, double b, double theta, double kappa, double r) {
  const double k2 = kappa * kappa;
  double need = a * (k2 + b);
  if (r >= 0.5 && r <= 1.0)
    need = std::max(need, 2.0 + 8.0 * k2 * a);
  else
    need = std::max(need, a * k2 + 1.0);
  need = std::max(need, 1.0);

  if (theta <= 0.0) {
    if (need > 1.0) throw RangeError("theta = 0 cannot meet the t0 precondition");
    return 1.0;
  }
  double t0 = std::max(1.0, std::ceil(std::pow(need, 1.0 / theta)));
  if (!std::isfinite(t0)) throw RangeError("t0 precondition needs an offset beyond double range");
  // integer steps are no longer representable
  if (t0 >= 0x1p52) return t0;
  while (std::pow(t0, theta) < need) t0 += 1.0;
  while (t0 > 1.0 && std::pow(t0 - 1.0, theta) >= need) t0 -= 1.0;
  return t0;
}

}  // namespace pathsa
