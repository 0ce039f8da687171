#include "pathsa/online_learner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pathsa/reg_path.hpp"

namespace pathsa {

void NodalState::finalize() {
  for (double& c : coeffs) c *= scale;
  scale = 1.0;
}

const Eigen::VectorXd& MercerKernel::features(double x) const {
  auto it = cache_.find(x);
  if (it != cache_.end()) return it->second;
  Eigen::VectorXd psi = model_->eigen().basis_values(x);
  psi.array() *= model_->mu().array().sqrt();
  return cache_.emplace(x, std::move(psi)).first->second;
}

SpectralVector to_spectral(const NodalState& s, const MercerKernel& kernel, const SpectralModel& model) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.modes()));
  for (std::size_t i = 0; i < s.support.size(); ++i) acc += s.coeffs[i] * kernel.features(s.support[i]);
  return {(s.scale * acc.array() * model.mu().array().sqrt()).matrix()};
}

double step_spectral(SpectralState& s, const SpectralModel& model, const Sample& z, const Eigen::VectorXd& phi,
                     double gamma, double lambda) {
  detail::check_step(gamma, lambda);
  if (s.f.coeffs.size() != phi.size() || phi.size() != model.mu().size())
    throw DimensionError("state, basis values and model mode counts differ");
  const double pred = s.f.coeffs.dot(phi);
  const double shrink = 1.0 - gamma * lambda;
  const double beta = -gamma * (pred - z.y);
  s.f.coeffs = shrink * s.f.coeffs + beta * model.mu().cwiseProduct(phi);
  ++s.t;
  return pred;
}

double step_spectral(SpectralState& s, const SpectralModel& model, const Sample& z, double gamma, double lambda) {
  return step_spectral(s, model, z, model.eigen().basis_values(z.x), gamma, lambda);
}

std::string_view representation_name(Representation rep) {
  return rep == Representation::kNodal ? "nodal" : "spectral";
}

Representation parse_representation(std::string_view name) {
  if (name == "nodal") return Representation::kNodal;
  if (name == "spectral") return Representation::kSpectral;
  throw RangeError("unknown representation '" + std::string(name) + "' (nodal|spectral)");
}

std::vector<std::size_t> geometric_checkpoints(std::size_t T, double start, int per_octave) {
  std::set<std::size_t> pts{0, T};
  for (int k = 0;; ++k) {
    const double v = std::round(start * std::exp2(static_cast<double>(k) / per_octave));
    if (v > static_cast<double>(T)) break;
    pts.insert(static_cast<std::size_t>(v));
  }
  return {pts.begin(), pts.end()};
}

namespace {

TraceRow make_row(const SpectralModel& model, const Schedule& schedule, const DecompositionTracker& tracker,
                  const Eigen::VectorXd& f, std::size_t t) {
  const StepSizes st = schedule_values(schedule, t);
  const Eigen::ArrayXd inv_sqrt_mu = model.mu().array().sqrt().inverse();
  const Eigen::VectorXd err = f - model.regression().coeffs;
  const Eigen::VectorXd rem = f - tracker.path_point();
  TraceRow row;
  row.t = t;
  row.err_rho = err.norm();
  row.err_K = (err.array() * inv_sqrt_mu).matrix().norm();
  row.rem_rho = rem.norm();
  row.rem_K = (rem.array() * inv_sqrt_mu).matrix().norm();
  row.fnorm_K = (f.array() * inv_sqrt_mu).matrix().norm();
  row.gamma = st.gamma;
  row.lambda = st.lambda;
  row.comp = tracker.components(f, Norm::kRho);
  return row;
}

}  // namespace

ErrorTrace run(const SpectralModel& model, const Schedule& schedule, const RunOptions& options) {
  const std::size_t T = options.horizon;
  const std::vector<std::size_t> checkpoints =
      options.checkpoints.empty() ? geometric_checkpoints(T) : options.checkpoints;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > T) throw RangeError("checkpoint beyond the horizon");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) throw RangeError("checkpoints must be strictly increasing");
  }

  const bool spectral = options.rep == Representation::kSpectral;
  ErrorTrace trace;
  trace.seed = options.seed;
  trace.rep = options.rep;
  trace.iterate_bound_checked = schedule.contraction_ok;

  const auto N = static_cast<Eigen::Index>(model.modes());
  const double km = model.kappa() * model.M_rho();
  const Eigen::ArrayXd inv_mu = model.mu().array().inverse();

  Rng rng(options.seed);
  DecompositionTracker tracker(model, schedule, spectral && options.track_sample);
  SpectralState sstate(model.modes());
  NodalState nstate;
  MercerKernel kernel(model);
  Eigen::VectorXd phi(N);
  Eigen::VectorXd f_prev(N);

  auto current = [&]() -> Eigen::VectorXd {
    return spectral ? sstate.f.coeffs : to_spectral(nstate, kernel, model).coeffs;
  };

  std::size_t next_cp = 0;
  if (next_cp < checkpoints.size() && checkpoints[next_cp] == 0) {
    trace.rows.push_back(make_row(model, schedule, tracker, current(), 0));
    ++next_cp;
  }

  for (std::size_t t = 1; t <= T; ++t) {
    const StepSizes st = schedule_values(schedule, t);
    const double shrink = 1.0 - st.gamma * st.lambda;
    if (!(shrink > 0.0 && shrink < 1.0)) ++trace.contraction_violations;
    const Sample z = draw_sample(model, rng, phi);

    double fnorm_K;
    if (spectral) {
      if (tracker.tracks_sample()) {
        f_prev = sstate.f.coeffs;
        tracker.advance(st.gamma, st.lambda, f_prev, phi, f_prev.dot(phi), z.y);
      } else {
        tracker.advance(st.gamma, st.lambda);
      }
      step_spectral(sstate, model, z, phi, st.gamma, st.lambda);
      fnorm_K = std::sqrt((sstate.f.coeffs.array().square() * inv_mu).sum());
    } else {
      tracker.advance(st.gamma, st.lambda);
      step_nodal(nstate, kernel, z, st.gamma, st.lambda);
      fnorm_K = std::sqrt(std::max(0.0, nstate.norm_K_sq));
    }

    if (trace.iterate_bound_checked) {
      const double ratio = fnorm_K * st.lambda / km;
      trace.max_iterate_bound_ratio = std::max(trace.max_iterate_bound_ratio, ratio);
      if (ratio > 1.0 + 1e-12) ++trace.iterate_bound_violations;
    }

    if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
      trace.rows.push_back(make_row(model, schedule, tracker, current(), t));
      ++next_cp;
    }
  }
  trace.final_f = {current()};
  return trace;
}

}  // namespace pathsa
