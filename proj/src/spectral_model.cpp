#include "pathsa/spectral_model.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pathsa/error.hpp"
#include "pathsa/text_format.hpp"

namespace pathsa {

namespace {

// Sum_{n > N} n^-e for the untruncated power-law tail: explicit terms up to a
// cutoff, then the midpoint-rule integral for the remainder.
double power_tail(std::size_t N, double e) {
  if (e <= 1.0) return std::numeric_limits<double>::infinity();
  const std::size_t cutoff = std::max<std::size_t>(N * 64, 1u << 16);
  double sum = 0.0;
  for (std::size_t n = cutoff; n > N; --n) sum += std::pow(static_cast<double>(n), -e);
  sum += std::pow(static_cast<double>(cutoff) + 0.5, 1.0 - e) / (e - 1.0);
  return sum;
}

}  // namespace

EigenSystem::EigenSystem(Eigen::VectorXd eigenvalues, Basis basis)
    : mu_(std::move(eigenvalues)), trace_(0.0), basis_(basis) {
  if (mu_.size() == 0) throw RangeError("eigen-system needs at least one mode");
  for (Eigen::Index k = 0; k < mu_.size(); ++k) {
    if (!(mu_[k] > 0.0) || !std::isfinite(mu_[k]))
      throw RangeError("eigenvalues must be finite and strictly positive");
    if (k > 0 && mu_[k] > mu_[k - 1]) throw RangeError("eigenvalues must be nonincreasing");
  }
  trace_ = mu_.sum();
}

EigenSystem EigenSystem::power_law(std::size_t modes, double decay) {
  if (modes == 0) throw RangeError("modes must be a positive count");
  if (!(decay > 0.0)) throw RangeError("mu_decay must be positive");
  Eigen::VectorXd mu(static_cast<Eigen::Index>(modes));
  for (std::size_t k = 0; k < modes; ++k) mu[static_cast<Eigen::Index>(k)] = std::pow(k + 1.0, -decay);
  return EigenSystem(std::move(mu));
}

void EigenSystem::basis_values(double x, Eigen::Ref<Eigen::VectorXd> out) const {
  const Eigen::Index n = mu_.size();
  out[0] = 1.0;
  if (n == 1) return;
  // cos(k pi x) by repeated rotation; error grows linearly in k.
  const double c1 = std::cos(std::numbers::pi * x);
  const double s1 = std::sin(std::numbers::pi * x);
  double c = c1, s = s1;
  out[1] = std::numbers::sqrt2 * c;
  for (Eigen::Index k = 2; k < n; ++k) {
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
    out[k] = std::numbers::sqrt2 * c;
  }
}

Eigen::VectorXd EigenSystem::basis_values(double x) const {
  Eigen::VectorXd out(mu_.size());
  basis_values(x, out);
  return out;
}

// ---------------------------------------------------------------------------

void ModelParams::validate() const {
  if (modes == 0) throw RangeError("modes must be a positive count");
  if (!(mu_decay > 0.0)) throw RangeError("mu_decay must be positive");
  if (!std::isfinite(source_decay)) throw RangeError("source_decay must be finite");
  if (!(r > 0.0)) throw RangeError("r must be positive");
  if (!(sigma >= 0.0)) throw RangeError("sigma must be nonnegative");
}

std::string ModelParams::to_text() const {
  std::ostringstream os;
  os << "modes = " << modes << '\n'
     << "mu_decay = " << format_double(mu_decay) << '\n'
     << "source_decay = " << format_double(source_decay) << '\n'
     << "r = " << format_double(r) << '\n'
     << "sigma = " << format_double(sigma) << '\n';
  return os.str();
}

bool ModelParams::set(const KeyValue& kv) {
  if (kv.key == "modes") {
    const long long v = parse_integer(kv.value, kv.line);
    if (v <= 0) throw ConfigError("modes must be a positive count", kv.line);
    modes = static_cast<std::size_t>(v);
  } else if (kv.key == "mu_decay") {
    mu_decay = parse_real(kv.value, kv.line);
  } else if (kv.key == "source_decay") {
    source_decay = parse_real(kv.value, kv.line);
  } else if (kv.key == "r") {
    r = parse_real(kv.value, kv.line);
  } else if (kv.key == "sigma") {
    sigma = parse_real(kv.value, kv.line);
  } else {
    return false;
  }
  return true;
}

ModelParams ModelParams::from_text(std::string_view text) {
  ModelParams p;
  for (const auto& kv : parse_key_values(text))
    if (!p.set(kv)) throw ConfigError("unknown model key '" + kv.key + "'", kv.line);
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------

SpectralModel::SpectralModel(EigenSystem eigen, double r, Eigen::VectorXd source_coeffs, double sigma)
    : eigen_(std::move(eigen)), r_(r), g_(std::move(source_coeffs)), sigma_(sigma) {
  if (!(r_ > 0.0)) throw RangeError("regularity r must be positive");
  if (!(sigma_ >= 0.0)) throw RangeError("noise half-width must be nonnegative");
  if (static_cast<std::size_t>(g_.size()) != eigen_.modes())
    throw DimensionError("source coefficients do not match the eigen-system");

  const Eigen::ArrayXd mu = eigen_.eigenvalues().array();
  f_rho_.coeffs = (mu.pow(r_) * g_.array()).matrix();

  source_norm_r_ = g_.norm();
  source_norm_1_ = compute_source_norm(1.0);
  source_norm_32_ = compute_source_norm(1.5);

  // Certify kappa and sup|f_rho| on a grid, then take the larger of the grid
  // value and the analytic series bound.
  Eigen::VectorXd phi(mu.size());
  double kdiag = 0.0, freg = 0.0;
  for (std::size_t i = 0; i < kCertificationGrid; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(kCertificationGrid - 1);
    eigen_.basis_values(x, phi);
    kdiag = std::max(kdiag, (mu * phi.array().square()).sum());
    freg = std::max(freg, std::abs(f_rho_.coeffs.dot(phi)));
  }
  grid_kdiag_max_ = kdiag;
  grid_freg_max_ = freg;

  const double sup_phi_sq = 2.0;  // |phi_k|^2 <= 2 for k >= 1
  const double kdiag_analytic = mu[0] + sup_phi_sq * (mu.sum() - mu[0]);
  const double freg_analytic =
      std::abs(f_rho_.coeffs[0]) + std::numbers::sqrt2 * (f_rho_.coeffs.array().abs().sum() -
                                                          std::abs(f_rho_.coeffs[0]));
  kappa_ = std::sqrt(std::max(kdiag, kdiag_analytic));
  M_rho_ = std::max(freg, freg_analytic) + sigma_;
}

SpectralModel SpectralModel::from_params(const ModelParams& params) {
  params.validate();
  EigenSystem eigen = EigenSystem::power_law(params.modes, params.mu_decay);
  Eigen::VectorXd g(static_cast<Eigen::Index>(params.modes));
  for (std::size_t k = 0; k < params.modes; ++k)
    g[static_cast<Eigen::Index>(k)] = std::pow(k + 1.0, -params.source_decay);
  SpectralModel model(std::move(eigen), params.r, std::move(g), params.sigma);
  model.truncation_tail_ = power_tail(params.modes, 2.0 * (params.mu_decay * params.r + params.source_decay));
  return model;
}

SpectralModel SpectralModel::from_regression(EigenSystem eigen, double r, Eigen::VectorXd regression,
                                             double sigma) {
  if (static_cast<std::size_t>(regression.size()) != eigen.modes())
    throw DimensionError("regression coefficients do not match the eigen-system");
  Eigen::VectorXd g = (regression.array() * eigen.eigenvalues().array().pow(-r)).matrix();
  return SpectralModel(std::move(eigen), r, std::move(g), sigma);
}

double SpectralModel::source_norm(double s) const {
  if (s == r_) return source_norm_r_;
  if (s == 1.0) return source_norm_1_;
  if (s == 1.5) return source_norm_32_;
  return compute_source_norm(s);
}

double SpectralModel::compute_source_norm(double s) const {
  const Eigen::ArrayXd mu = eigen_.eigenvalues().array();
  return (mu.pow(r_ - s) * g_.array()).matrix().norm();
}

// ---------------------------------------------------------------------------

double kernel_eval(const SpectralModel& model, double x, double x2) {
  const Eigen::VectorXd p = model.eigen().basis_values(x);
  const Eigen::VectorXd q = model.eigen().basis_values(x2);
  return (model.mu().array() * p.array() * q.array()).sum();
}

double eval_function(const SpectralModel& model, const SpectralVector& f, double x) {
  if (f.size() != model.modes()) throw DimensionError("function does not match the model's mode count");
  return f.coeffs.dot(model.eigen().basis_values(x));
}

double norm_rho(const SpectralVector& f) { return f.coeffs.norm(); }

double norm_K(const SpectralModel& model, const SpectralVector& f) {
  if (f.size() != model.modes()) throw DimensionError("function does not match the model's mode count");
  return std::sqrt((f.coeffs.array().square() / model.mu().array()).sum());
}

SpectralVector scale_by_sqrt_mu(const SpectralModel& model, const SpectralVector& f) {
  if (f.size() != model.modes()) throw DimensionError("function does not match the model's mode count");
  return {(f.coeffs.array() * model.mu().array().sqrt()).matrix()};
}

Sample draw_sample(const SpectralModel& model, Rng& rng, Eigen::Ref<Eigen::VectorXd> phi_out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double x = unit(rng);
  const double u = unit(rng);
  model.eigen().basis_values(x, phi_out);
  const double sigma = model.noise_halfwidth();
  const double noise = sigma * (2.0 * u - 1.0);
  return {x, model.regression().coeffs.dot(phi_out) + noise};
}

Sample draw_sample(const SpectralModel& model, Rng& rng) {
  Eigen::VectorXd phi(static_cast<Eigen::Index>(model.modes()));
  return draw_sample(model, rng, phi);
}

}  // namespace pathsa
