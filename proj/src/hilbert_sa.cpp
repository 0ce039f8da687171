#include "pathsa/hilbert_sa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pathsa/error.hpp"

namespace pathsa {

namespace {

constexpr double kMaxCondition = 1e12;

Eigen::VectorXd solve_path(const Eigen::MatrixXd& a_bar, const Eigen::VectorXd& b_bar, double lambda) {
  const Eigen::Index d = a_bar.rows();
  const Eigen::MatrixXd m = a_bar + lambda * Eigen::MatrixXd::Identity(d, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition)
    throw ConditioningError("A_bar + lambda I is singular or too ill-conditioned (lambda = " +
                            std::to_string(lambda) + ")");
  return es.eigenvectors() * ((es.eigenvectors().transpose() * b_bar).array() / es.eigenvalues().array()).matrix();
}

void check_window(const TrajectoryRecord& rec, std::size_t s, std::size_t t) {
  if (s > t || t + 1 > rec.iterates.size()) throw RangeError("decomposition window out of range");
}

Eigen::MatrixXd shifted(const Eigen::MatrixXd& a, double lambda) {
  return a + lambda * Eigen::MatrixXd::Identity(a.rows(), a.cols());
}

}  // namespace

Eigen::MatrixXd FiniteProblem::mean_A() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
  for (std::size_t z = 0; z < outcomes(); ++z) m += probs[z] * A[z];
  return m;
}

Eigen::VectorXd FiniteProblem::mean_b() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim());
  for (std::size_t z = 0; z < outcomes(); ++z) v += probs[z] * b[z];
  return v;
}

void FiniteProblem::validate() const {
  if (probs.empty()) throw RangeError("finite problem needs at least one outcome");
  if (A.size() != probs.size() || b.size() != probs.size())
    throw DimensionError("A, b and probabilities must have one entry per outcome");
  const Eigen::Index d = dim();
  if (d == 0) throw DimensionError("finite problem needs dimension >= 1");
  double total = 0.0;
  for (std::size_t z = 0; z < probs.size(); ++z) {
    if (!(probs[z] >= 0.0)) throw RangeError("probabilities must be nonnegative");
    total += probs[z];
    if (A[z].rows() != d || A[z].cols() != d || b[z].size() != d)
      throw DimensionError("outcome " + std::to_string(z) + " has the wrong shape");
    if ((A[z] - A[z].transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A[z].cwiseAbs().maxCoeff()))
      throw RangeError("A(" + std::to_string(z) + ") is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A[z], Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) throw RangeError("A(" + std::to_string(z) + ") is not PSD");
  }
  if (std::abs(total - 1.0) > 1e-12) throw RangeError("probabilities must sum to 1");
  if (lambda_seq.size() != gamma_seq.size())
    throw DimensionError("lambda_seq and gamma_seq must both cover t = 0..T");
  for (std::size_t t = 0; t < lambda_seq.size(); ++t) {
    if (!(lambda_seq[t] >= 0.0)) throw RangeError("lambda_t must be nonnegative");
    if (t > 0 && !(gamma_seq[t] >= 0.0)) throw RangeError("gamma_t must be nonnegative");
  }
}

FiniteProblem random_problem(Eigen::Index dim, std::size_t outcomes, std::size_t T, std::uint64_t seed) {
  if (dim < 1 || outcomes < 1) throw RangeError("random_problem needs dim >= 1 and outcomes >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  auto fill = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = unif(rng);
    return m;
  };

  FiniteProblem p;
  double max_norm = 0.0;
  for (std::size_t z = 0; z < outcomes; ++z) {
    const Eigen::MatrixXd r = fill(dim, dim);
    p.A.push_back(r * r.transpose());
    p.b.push_back(fill(dim, 1).col(0));
    p.probs.push_back(weight(rng));
    max_norm = std::max(max_norm, operator_norm(p.A.back()));
  }
  const double total = std::accumulate(p.probs.begin(), p.probs.end(), 0.0);
  for (double& q : p.probs) q /= total;
  p.w0 = fill(dim, 1).col(0);

  const double b = 1.0;
  const double a = 1.0 / (max_norm + b);
  const double t0 = 1.0;
  p.lambda_seq.resize(T + 1);
  p.gamma_seq.assign(T + 1, 0.0);
  for (std::size_t t = 0; t <= T; ++t) {
    const double tbar = static_cast<double>(t) + t0;
    p.lambda_seq[t] = b / std::cbrt(tbar);
    if (t > 0) p.gamma_seq[t] = a / std::pow(tbar, 2.0 / 3.0);
  }
  p.product_rate = FiniteProblem::ProductRate{a * b, t0};
  return p;
}

TrajectoryRecord iterate(const FiniteProblem& p, std::size_t T, std::uint64_t seed) {
  if (T > p.horizon()) throw RangeError("schedule is shorter than the requested horizon");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(p.probs.begin(), p.probs.end());
  std::vector<int> draws(T);
  for (int& z : draws) z = pick(rng);
  return iterate_draws(p, draws);
}

TrajectoryRecord iterate_draws(const FiniteProblem& p, const std::vector<int>& draws) {
  p.validate();
  const std::size_t T = draws.size();
  if (T > p.horizon()) throw RangeError("schedule is shorter than the requested horizon");
  const Eigen::MatrixXd a_bar = p.mean_A();
  const Eigen::VectorXd b_bar = p.mean_b();

  TrajectoryRecord rec;
  rec.draws = draws;
  rec.iterates.reserve(T + 1);
  rec.path.reserve(T + 1);
  rec.remainders.reserve(T + 1);
  rec.iterates.push_back(p.w0);
  rec.path.push_back(solve_path(a_bar, b_bar, p.lambda_seq[0]));
  rec.remainders.push_back(rec.iterates[0] - rec.path[0]);

  for (std::size_t t = 1; t <= T; ++t) {
    const int z = draws[t - 1];
    if (z < 0 || static_cast<std::size_t>(z) >= p.outcomes()) throw RangeError("outcome index out of range");
    const Eigen::VectorXd& w = rec.iterates.back();
    const Eigen::VectorXd step = p.A[z] * w + p.lambda_seq[t] * w - p.b[z];
    rec.iterates.push_back(w - p.gamma_seq[t] * step);
    rec.path.push_back(solve_path(a_bar, b_bar, p.lambda_seq[t]));
    rec.remainders.push_back(rec.iterates[t] - rec.path[t]);
  }
  return rec;
}

DecompositionTerms reversed_decomposition_terms(const TrajectoryRecord& rec, const FiniteProblem& p,
                                                std::size_t s, std::size_t t) {
  check_window(rec, s, t);
  DecompositionTerms out{rec.remainders[s], Eigen::VectorXd::Zero(p.dim()), Eigen::VectorXd::Zero(p.dim())};
  for (std::size_t j = s + 1; j <= t; ++j) {
    const Eigen::MatrixXd a_j = shifted(p.A[rec.draws[j - 1]], p.lambda_seq[j]);
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p.dim(), p.dim()) - p.gamma_seq[j] * a_j;
    const Eigen::VectorXd delta = rec.path[j] - rec.path[j - 1];
    out.init = m * out.init;
    out.sample = m * out.sample + p.gamma_seq[j] * (a_j * rec.path[j] - p.b[rec.draws[j - 1]]);
    out.drift = m * (out.drift + delta);
  }
  return out;
}

DecompositionTerms martingale_decomposition_terms(const TrajectoryRecord& rec, const FiniteProblem& p,
                                                  std::size_t s, std::size_t t) {
  check_window(rec, s, t);
  const Eigen::MatrixXd a_bar = p.mean_A();
  const Eigen::VectorXd b_bar = p.mean_b();
  DecompositionTerms out{rec.remainders[s], Eigen::VectorXd::Zero(p.dim()), Eigen::VectorXd::Zero(p.dim())};
  for (std::size_t j = s + 1; j <= t; ++j) {
    const int z = rec.draws[j - 1];
    const Eigen::MatrixXd m =
        Eigen::MatrixXd::Identity(p.dim(), p.dim()) - p.gamma_seq[j] * shifted(a_bar, p.lambda_seq[j]);
    const Eigen::VectorXd chi = (a_bar - p.A[z]) * rec.iterates[j - 1] + (p.b[z] - b_bar);
    const Eigen::VectorXd delta = rec.path[j] - rec.path[j - 1];
    out.init = m * out.init;
    out.sample = m * out.sample + p.gamma_seq[j] * chi;
    out.drift = m * (out.drift + delta);
  }
  return out;
}

namespace {

template <class OperatorAt>
ContractionCheck product_check(const FiniteProblem& p, std::size_t j, std::size_t t, OperatorAt op) {
  ContractionCheck out{true, 1.0, 1.0, std::nullopt};
  if (j > t) return out;
  if (j < 1 || t > p.horizon()) throw RangeError("product window out of range");
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(p.dim(), p.dim());
  for (std::size_t i = j; i <= t; ++i) {
    const Eigen::MatrixXd a_i = op(i);
    if (p.gamma_seq[i] * operator_norm(a_i) > 1.0 + 1e-12) out.precondition_ok = false;
    prod = (Eigen::MatrixXd::Identity(p.dim(), p.dim()) - p.gamma_seq[i] * a_i) * prod;
    out.bound *= 1.0 - p.gamma_seq[i] * p.lambda_seq[i];
  }
  out.measured = operator_norm(prod);
  if (p.product_rate) out.closed_form = closed_form_product_bound(p.product_rate->c, p.product_rate->t0, j, t);
  return out;
}

}  // namespace

ContractionCheck contraction_bound_check(const TrajectoryRecord& rec, const FiniteProblem& p,
                                         std::size_t j, std::size_t t) {
  if (j <= t && t > rec.draws.size()) throw RangeError("product window beyond the recorded trajectory");
  return product_check(p, j, t, [&](std::size_t i) { return shifted(p.A[rec.draws[i - 1]], p.lambda_seq[i]); });
}

ContractionCheck mean_contraction_bound_check(const FiniteProblem& p, std::size_t j, std::size_t t) {
  const Eigen::MatrixXd a_bar = p.mean_A();
  return product_check(p, j, t, [&](std::size_t i) { return shifted(a_bar, p.lambda_seq[i]); });
}

double telescoped_product(double c, double t0, std::size_t j, std::size_t t) {
  double prod = 1.0;
  for (std::size_t i = j; i <= t; ++i) prod *= 1.0 - c / (static_cast<double>(i) + t0);
  return prod;
}

double closed_form_product_bound(double c, double t0, std::size_t j, std::size_t t) {
  if (j > t) return 1.0;
  return std::pow((static_cast<double>(j) + t0) / (static_cast<double>(t) + t0 + 1.0), c);
}

double operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.transpose() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double drift_exponent(double r, double theta_lambda) { return -(r - 0.5) * theta_lambda - 1.0; }

ConvergenceFlags convergence_flags(const PowerLawFamily& f, double drift_exp) {
  if (!(f.a > 0.0) || !(f.b > 0.0) || !(f.t0 > 0.0) || !std::isfinite(f.theta_gamma) ||
      !std::isfinite(f.theta_lambda) || !std::isfinite(drift_exp))
    throw RangeError("not a power-law schedule family");
  const double gl = f.theta_gamma + f.theta_lambda;
  return {gl <= 1.0, f.theta_gamma > f.theta_lambda, drift_exp + gl < 0.0};
}

ConvergenceReport check_convergence_conditions(const PowerLawFamily& f, double drift_exp, std::size_t horizon) {
  ConvergenceReport rep{convergence_flags(f, drift_exp), horizon, 0.0, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t t = 1; t <= horizon; ++t) {
    const double tbar = static_cast<double>(t) + f.t0;
    const double g = f.a / std::pow(tbar, f.theta_gamma);
    const double l = f.b / std::pow(tbar, f.theta_lambda);
    const double q = std::clamp(1.0 - g * l, 0.0, 1.0);
    rep.partial_sum_gl += g * l;
    rep.variance_sum = q * q * rep.variance_sum + g * g;
    rep.drift_sum = q * rep.drift_sum + std::pow(tbar, drift_exp);
    if (t == horizon) {
      rep.gamma_over_lambda = g / l;
      rep.drift_over_gl = std::pow(tbar, drift_exp) / (g * l);
    }
  }
  return rep;
}

}  // namespace pathsa
