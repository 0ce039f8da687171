#include "pathsa/reg_path.hpp"

#include <algorithm>
#include <cmath>

#include "pathsa/error.hpp"

namespace pathsa {

SpectralVector path_coefficients(const SpectralModel& model, double lambda) {
  if (!(lambda >= 0.0)) throw RangeError("regularization parameter must be nonnegative");
  const Eigen::ArrayXd mu = model.mu().array();
  return {(model.regression().coeffs.array() * mu / (mu + lambda)).matrix()};
}

PathPoint tikhonov_solution(const SpectralModel& model, double lambda) {
  if (!(lambda > 0.0)) throw RangeError("tikhonov_solution requires lambda > 0");
  PathPoint p{lambda, path_coefficients(model, lambda), 0.0, 0.0};
  const SpectralVector diff{p.f_lambda.coeffs - model.regression().coeffs};
  p.approx_err_rho = norm_rho(diff);
  p.approx_err_K = norm_K(model, diff);
  return p;
}

double tikhonov_residual(const SpectralModel& model, const PathPoint& point) {
  const Eigen::ArrayXd mu = model.mu().array();
  const Eigen::ArrayXd lhs = (mu + point.lambda) * point.f_lambda.coeffs.array();
  const Eigen::ArrayXd rhs = mu * model.regression().coeffs.array();
  return (lhs - rhs).matrix().norm();
}

double drift(const SpectralModel& model, double lambda, double mu, Norm norm) {
  if (!(lambda >= 0.0) || !(mu >= 0.0)) throw RangeError("drift parameters must be nonnegative");
  // c mu_a (mu - lambda) / ((mu_a + lambda)(mu_a + mu)), formed directly so that
  // lambda == mu gives an exact zero.
  const Eigen::ArrayXd ev = model.mu().array();
  const Eigen::ArrayXd diff =
      model.regression().coeffs.array() * ev * (mu - lambda) / ((ev + lambda) * (ev + mu));
  const SpectralVector d{diff.matrix()};
  return norm == Norm::kRho ? norm_rho(d) : norm_K(model, d);
}

char clause_letter(DriftClause c) { return static_cast<char>('A' + static_cast<int>(c)); }

DriftClause parse_clause(char letter) {
  if (letter >= 'a' && letter <= 'e') letter = static_cast<char>(letter - 'a' + 'A');
  if (letter < 'A' || letter > 'E') throw RangeError(std::string("unknown drift clause '") + letter + "'");
  return static_cast<DriftClause>(letter - 'A');
}

Norm clause_norm(DriftClause c) {
  return (c == DriftClause::A || c == DriftClause::B) ? Norm::kRho : Norm::kK;
}

bool clause_valid(DriftClause c, double r) {
  switch (c) {
    case DriftClause::A: return r >= -1.0 && r <= 1.0 && r != 0.0;
    case DriftClause::B: return r >= 1.0;
    case DriftClause::C: return r >= 0.5;
    case DriftClause::D: return r >= -0.5 && r <= 1.5 && r != 0.5;
    case DriftClause::E: return r >= 1.5;
  }
  return false;
}

double drift_bound(const SpectralModel& model, const DriftQuery& q) {
  if (!(q.lambda >= 0.0) || !(q.mu >= 0.0)) throw RangeError("drift_bound parameters must be nonnegative");
  if (!clause_valid(q.clause, q.r))
    throw RangeError(std::string("clause ") + clause_letter(q.clause) + " is not valid for r = " +
                     std::to_string(q.r));
  const double hi = std::max(q.lambda, q.mu);
  const double lo = std::min(q.lambda, q.mu);
  if (hi == lo) return 0.0;
  const double r = q.r;

  switch (q.clause) {
    case DriftClause::A:
      return std::abs(std::pow(hi, r) - std::pow(lo, r)) * model.source_norm(r) / std::abs(r);
    case DriftClause::B: {
      const double s = q.s.value_or(1.0);
      if (s < 1.0 || s > r) throw RangeError("clause B needs 1 <= s <= r");
      return std::pow(model.kappa(), 2.0 * (s - 1.0)) * (hi - lo) * model.source_norm(s);
    }
    case DriftClause::C: {
      const SpectralVector& f = model.regression();
      return (hi - lo) / hi * norm_K(model, f);
    }
    case DriftClause::D: {
      const double e = r - 0.5;
      return std::abs(std::pow(hi, e) - std::pow(lo, e)) * model.source_norm(r) / std::abs(e);
    }
    case DriftClause::E: {
      const double s = q.s.value_or(1.5);
      if (s < 1.5 || s > r) throw RangeError("clause E needs 3/2 <= s <= r");
      return std::pow(model.kappa(), 2.0 * (s - 1.5)) * (hi - lo) * model.source_norm(s);
    }
  }
  return 0.0;
}

std::vector<DriftCheck> verify_drift_inequalities(const SpectralModel& model,
                                                  std::span<const DriftQuery> grid) {
  std::vector<DriftCheck> out;
  out.reserve(grid.size());
  for (const DriftQuery& q : grid) {
    const double bound = drift_bound(model, q);
    const double measured = drift(model, q.lambda, q.mu, clause_norm(q.clause));
    out.push_back({q, measured, bound, measured <= bound * (1.0 + kDriftSlack)});
  }
  return out;
}

std::vector<DriftQuery> default_drift_grid(std::span<const double> rs, int kmax) {
  std::vector<DriftQuery> grid;
  for (double r : rs) {
    for (DriftClause c : {DriftClause::A, DriftClause::B, DriftClause::C, DriftClause::D, DriftClause::E}) {
      if (!clause_valid(c, r)) continue;
      for (int i = 1; i <= kmax; ++i)
        for (int j = 1; j <= kmax; ++j)
          grid.push_back({std::ldexp(1.0, -i), std::ldexp(1.0, -j), r, c});
    }
  }
  return grid;
}

}  // namespace pathsa
