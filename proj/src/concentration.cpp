#include "pathsa/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include <boost/math/distributions/binomial.hpp>

#include "pathsa/error.hpp"

namespace pathsa {

namespace {

void check_tail_args(double M, double sigma_sq, double eps) {
  if (!(M > 0.0) || !(sigma_sq > 0.0) || !(eps > 0.0))
    throw RangeError("tail bounds need M > 0, sigma^2 > 0 and eps > 0");
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

Rng path_rng(std::uint64_t seed, std::size_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return Rng(seq);
}

}  // namespace

double bennett_tail(double M, double sigma_sq, double eps) {
  check_tail_args(M, sigma_sq, eps);
  const double x = M * eps / sigma_sq;
  const double g = (1.0 + x) * std::log1p(x) - x;
  return clamp01(2.0 * std::exp(-sigma_sq / (M * M) * g));
}

double bernstein_tail(double M, double sigma_sq, double eps) {
  check_tail_args(M, sigma_sq, eps);
  return clamp01(2.0 * std::exp(-eps * eps / (2.0 * (sigma_sq + M * eps / 3.0))));
}

double high_prob_radius(double M, double sigma_t, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw RangeError("delta must lie in (0, 1)");
  if (!(M >= 0.0) || !(sigma_t >= 0.0)) throw RangeError("M and sigma_t must be nonnegative");
  return 2.0 * (M / 3.0 + sigma_t) * std::log(2.0 / delta);
}

MartingaleSpec rademacher_generator(double M) {
  if (!(M > 0.0)) throw RangeError("rademacher generator needs M > 0");
  MartingaleSpec spec;
  spec.name = "rademacher";
  spec.declared = [M](std::size_t t) {
    return DeclaredBounds{std::vector<double>(t, M), M, M * std::sqrt(static_cast<double>(t))};
  };
  spec.draw = [M](Rng& rng, std::size_t t, std::vector<Eigen::VectorXd>& out) {
    std::bernoulli_distribution coin(0.5);
    out.assign(t, Eigen::VectorXd(1));
    for (auto& v : out) v[0] = coin(rng) ? M : -M;
  };
  return spec;
}

MartingaleSpec sphere_generator(Eigen::Index dim, double M) {
  if (dim < 1 || !(M > 0.0)) throw RangeError("sphere generator needs dim >= 1 and M > 0");
  MartingaleSpec spec;
  spec.name = "sphere";
  spec.declared = [M](std::size_t t) {
    return DeclaredBounds{std::vector<double>(t, M), M, M * std::sqrt(static_cast<double>(t))};
  };
  spec.draw = [dim, M](Rng& rng, std::size_t t, std::vector<Eigen::VectorXd>& out) {
    std::normal_distribution<double> normal;
    out.assign(t, Eigen::VectorXd(dim));
    for (auto& v : out) {
      double n = 0.0;
      while (n == 0.0) {
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(rng);
        n = v.norm();
      }
      v *= M / n;
    }
  };
  return spec;
}

MartingaleSpec zero_generator() {
  MartingaleSpec spec;
  spec.name = "zero";
  spec.declared = [](std::size_t t) { return DeclaredBounds{std::vector<double>(t, 1.0), 1.0, 0.0}; };
  spec.draw = [](Rng&, std::size_t t, std::vector<Eigen::VectorXd>& out) {
    out.assign(t, Eigen::VectorXd::Zero(1));
  };
  return spec;
}

MartingaleSpec learner_generator(const SpectralModel& model, const Schedule& schedule) {
  if (!schedule.contraction_ok)
    throw RangeError("learner generator needs a schedule in the contraction regime");
  const double k = model.kappa();
  const double m = model.M_rho();
  MartingaleSpec spec;
  spec.name = "learner";
  spec.declared = [k, m, schedule](std::size_t t) {
    DeclaredBounds d{std::vector<double>(t), 0.0, 0.0};
    double ss = 0.0;
    for (std::size_t j = 1; j <= t; ++j) {
      const double gamma = schedule_values(schedule, j).gamma;
      const double lambda_prev = schedule_values(schedule, j - 1).lambda;
      const double bound = gamma * k * (2.0 * k * k * k * m / lambda_prev + 2.0 * k * m);
      d.step_bound[j - 1] = bound;
      d.M = std::max(d.M, bound);
      ss += bound * bound;
    }
    d.sigma_t = std::sqrt(ss);
    return d;
  };
  spec.draw = [&model, schedule](Rng& rng, std::size_t t, std::vector<Eigen::VectorXd>& out) {
    const Eigen::ArrayXd mu = model.mu().array();
    const Eigen::ArrayXd c = model.regression().coeffs.array();
    const auto N = mu.size();
    Eigen::ArrayXd f = Eigen::ArrayXd::Zero(N);
    Eigen::VectorXd phi(N);
    std::vector<Eigen::ArrayXd> factors(t);
    out.assign(t, Eigen::VectorXd(N));
    for (std::size_t j = 1; j <= t; ++j) {
      const StepSizes st = schedule_values(schedule, j);
      const Sample z = draw_sample(model, rng, phi);
      const double pred = (f * phi.array()).sum();
      out[j - 1] = (st.gamma * mu * (f - c + (z.y - pred) * phi.array())).matrix();
      factors[j - 1] = 1.0 - st.gamma * (mu + st.lambda);
      f = (1.0 - st.gamma * st.lambda) * f - st.gamma * (pred - z.y) * mu * phi.array();
    }
    Eigen::ArrayXd tail = Eigen::ArrayXd::Ones(N);
    for (std::size_t j = t; j >= 1; --j) {
      out[j - 1].array() *= tail;
      tail *= factors[j - 1];
    }
  };
  return spec;
}

double binomial_upper_limit(std::size_t successes, std::size_t trials, double confidence) {
  if (trials == 0 || successes > trials) throw RangeError("binomial limit needs 0 <= k <= n, n >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw RangeError("confidence must lie in (0, 1)");
  using boost::math::binomial_distribution;
  return binomial_distribution<>::find_upper_bound_on_p(static_cast<double>(trials), static_cast<double>(successes),
                                                        1.0 - confidence);
}

CoverageResult coverage_test(const MartingaleSpec& spec, std::size_t t, double delta, std::size_t n_paths,
                             std::uint64_t seed, double radius_scale, unsigned threads, double confidence) {
  if (n_paths < 1) throw RangeError("coverage test needs n_paths >= 1");
  if (!(radius_scale > 0.0)) throw RangeError("radius scale must be positive");
  const DeclaredBounds declared = spec.declared(t);
  const double radius = radius_scale * high_prob_radius(declared.M, declared.sigma_t, delta);

  struct Partial {
    std::size_t violations = 0;
    double max_ratio = 0.0;
    std::exception_ptr error;
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_paths)));
  std::vector<Partial> partial(threads);

  auto work = [&](unsigned w) {
    std::vector<Eigen::VectorXd> xi;
    try {
      for (std::size_t p = w; p < n_paths; p += threads) {
        Rng rng = path_rng(seed, p);
        spec.draw(rng, t, xi);
        if (xi.size() != t) throw SpecViolation(spec.name + " generator produced the wrong path length");
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(t > 0 ? xi[0].size() : 1);
        double sup = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
          if (xi[j].norm() > declared.step_bound[j] * (1.0 + 1e-12))
            throw SpecViolation(spec.name + " generator exceeded its declared bound at step " +
                                std::to_string(j + 1));
          sum += xi[j];
          sup = std::max(sup, sum.norm());
        }
        if (sup > radius) ++partial[w].violations;
        if (radius > 0.0) partial[w].max_ratio = std::max(partial[w].max_ratio, sup / radius);
      }
    } catch (...) {
      partial[w].error = std::current_exception();
    }
  };

  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  CoverageResult res;
  res.n_paths = n_paths;
  res.radius = radius;
  for (const Partial& p : partial) {
    if (p.error) std::rethrow_exception(p.error);
    res.violations += p.violations;
    res.max_observed_ratio = std::max(res.max_observed_ratio, p.max_ratio);
  }
  res.rate = static_cast<double>(res.violations) / static_cast<double>(n_paths);
  res.upper_limit = binomial_upper_limit(res.violations, n_paths, confidence);
  return res;
}

}  // namespace pathsa
