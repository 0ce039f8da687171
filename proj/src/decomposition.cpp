#include "pathsa/decomposition.hpp"

#include <limits>

#include "pathsa/error.hpp"

namespace pathsa {

DecompositionTracker::DecompositionTracker(const SpectralModel& model, const Schedule& schedule,
                                           bool track_sample)
    : model_(&model),
      contraction_ok_(schedule.contraction_ok),
      track_sample_(track_sample),
      mu_(model.mu().array()),
      c_(model.regression().coeffs.array()) {
  const double lambda0 = schedule_values(schedule, 0).lambda;
  path_ = (c_ * mu_ / (mu_ + lambda0)).matrix();
  init_ = -path_;
  drift_ = Eigen::VectorXd::Zero(path_.size());
  sample_ = Eigen::VectorXd::Zero(path_.size());
}

void DecompositionTracker::advance(double gamma, double lambda, const Eigen::VectorXd& f_prev,
                                   const Eigen::VectorXd& phi, double pred, double y) {
  const Eigen::ArrayXd q = 1.0 - gamma * (mu_ + lambda);
  const Eigen::ArrayXd next = c_ * mu_ / (mu_ + lambda);
  const Eigen::ArrayXd delta = next - path_.array();
  init_ = (q * init_.array()).matrix();
  drift_ = (q * (drift_.array() + delta)).matrix();
  if (track_sample_) {
    const Eigen::ArrayXd chi = mu_ * (f_prev.array() - c_ + (y - pred) * phi.array());
    sample_ = (q * sample_.array() + gamma * chi).matrix();
  }
  path_ = next.matrix();
  ++t_;
}

void DecompositionTracker::advance(double gamma, double lambda) {
  track_sample_ = false;
  advance(gamma, lambda, path_, path_, 0.0, 0.0);
}

double DecompositionTracker::measure(const Eigen::VectorXd& v, Norm norm) const {
  return norm == Norm::kRho ? v.norm() : (v.array() / mu_.sqrt()).matrix().norm();
}

ErrorComponents DecompositionTracker::components(const Eigen::VectorXd& f_t, Norm norm) const {
  if (f_t.size() != path_.size()) throw DimensionError("iterate and model mode counts differ");
  const Eigen::VectorXd r = f_t - path_;
  ErrorComponents e;
  e.init = measure(init_, norm);
  e.approx = measure((path_.array() - c_).matrix(), norm);
  e.drift = measure(drift_, norm);
  e.samp = measure(r - init_ + drift_, norm);
  e.samp_direct = track_sample_ ? measure(sample_, norm) : std::numeric_limits<double>::quiet_NaN();
  e.valid = norm == Norm::kRho || contraction_ok_;
  return e;
}

ErrorComponents decompose_errors(const SpectralModel& model, const Schedule& schedule,
                                 const SpectralVector& f_t, std::size_t t, Norm norm) {
  DecompositionTracker tracker(model, schedule, false);
  for (std::size_t j = 1; j <= t; ++j) {
    const StepSizes s = schedule_values(schedule, j);
    tracker.advance(s.gamma, s.lambda);
  }
  return tracker.components(f_t.coeffs, norm);
}

}  // namespace pathsa
