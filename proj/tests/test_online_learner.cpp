#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pathsa/error.hpp"
#include "pathsa/online_learner.hpp"
#include "pathsa/reg_path.hpp"

using namespace pathsa;

namespace {

// Two points with K(x,x) = 1 and K(x1,x2) = 1/2.
struct TwoPointKernel {
  double operator()(double x, double y) const { return x == y ? 1.0 : 0.5; }
};

Schedule reference_schedule(const SpectralModel& m) {
  const double a = 4.0, b = 0.25, theta = 2.0 / 3.0;
  return Schedule::make(a, b, theta, minimal_t0(a, b, theta, m.kappa(), 1.0), 1.0, m.kappa());
}

}  // namespace

TEST(Schedule, PerfectCube) {
  const Schedule s = Schedule::make(1.0, 1.0, 2.0 / 3.0, 8.0, 1.0, 1.0);
  const StepSizes v = schedule_values(s, 19);
  EXPECT_NEAR(v.gamma, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(v.lambda, 1.0 / 3.0, 1e-15);
}

TEST(Schedule, ProductIdentity) {
  const Schedule s = Schedule::make(3.0, 0.7, 0.6, 5.5, 1.0, 1.0);
  for (std::size_t t : {1u, 7u, 100u, 12345u}) {
    const StepSizes v = schedule_values(s, t);
    EXPECT_NEAR(v.gamma * v.lambda * (t + 5.5), 3.0 * 0.7, 1e-13);
  }
}

TEST(Schedule, LambdaHalvesOverEightfoldTime) {
  // theta = 2r/(2r+1) at r = 1, t0 -> 0.
  const Schedule s = Schedule::make(1.0, 1.0, theta_for_regularity(1.0), 1e-12, 1.0, 1.0);
  EXPECT_NEAR(schedule_values(s, 1000).lambda / schedule_values(s, 8000).lambda, 2.0, 1e-12);
}

TEST(Schedule, Validation) {
  EXPECT_THROW(Schedule::make(0.0, 1.0, 0.5, 1.0, 1.0, 1.0), RangeError);
  EXPECT_THROW(Schedule::make(1.0, 1.0, 1.5, 1.0, 1.0, 1.0), RangeError);
  EXPECT_THROW(Schedule::make(1.0, 1.0, 0.5, 0.0, 1.0, 1.0), RangeError);
  EXPECT_NEAR(theta_for_regularity(1.0), 2.0 / 3.0, 1e-16);
}

TEST(Schedule, ReferenceFlagsAndMinimalOffset) {
  const SpectralModel m = SpectralModel::from_params({});
  const double k2 = m.kappa_sq();
  // Oracle: smallest integer t0 with t0^(2/3) >= max(2 + 32 k2, 4 (k2 + 1/4)).
  const double need = std::max(2.0 + 32.0 * k2, 4.0 * (k2 + 0.25));
  double t0 = 1.0;
  while (std::pow(t0, 2.0 / 3.0) < need) t0 += 1.0;
  const Schedule s = reference_schedule(m);
  EXPECT_EQ(s.t0, t0);
  EXPECT_TRUE(s.thmA_ok);
  EXPECT_TRUE(s.thmB_ok);
  EXPECT_TRUE(s.thmB_proof_ok);
  EXPECT_TRUE(s.thmC_ok);
  EXPECT_TRUE(s.contraction_ok);
  const Schedule early = Schedule::make(4.0, 0.25, 2.0 / 3.0, t0 - 1.0, 1.0, m.kappa());
  EXPECT_FALSE(early.thmC_ok);
}

TEST(Schedule, StatedAndProofPreconditionsAgreeWhenAbIsOne) {
  // a (kappa^2 + b) = a kappa^2 + 1 once ab = 1.
  for (double t0 : {5.0, 8.0, 30.0}) {
    const Schedule s = Schedule::make(2.0, 0.5, 2.0 / 3.0, t0, 1.0, 1.0);
    EXPECT_EQ(s.thmB_ok, s.thmB_proof_ok);
  }
}

TEST(StepNodal, FirstStep) {
  NodalState s;
  TwoPointKernel k;
  step_nodal(s, k, {0.0, 2.0}, 0.3, 0.5);
  s.finalize();
  ASSERT_EQ(s.coeffs.size(), 1u);
  EXPECT_NEAR(s.coeffs[0], 0.3 * 2.0, 1e-15);
  EXPECT_EQ(s.scale, 1.0);
}

TEST(StepNodal, TwoStepHandUnrolled) {
  NodalState s;
  TwoPointKernel k;
  step_nodal(s, k, {0.0, 1.0}, 0.1, 0.1);
  step_nodal(s, k, {1.0, 1.0}, 0.1, 0.1);
  s.finalize();
  EXPECT_NEAR(s.coeffs[0], 0.099, 1e-15);
  EXPECT_NEAR(s.coeffs[1], 0.095, 1e-15);
  // ||f||_K^2 = c' K c
  const double expected = 0.099 * 0.099 + 0.095 * 0.095 + 2 * 0.5 * 0.099 * 0.095;
  EXPECT_NEAR(s.norm_K_sq, expected, 1e-15);
}

TEST(StepNodal, ZeroTargetsStayZero) {
  NodalState s;
  TwoPointKernel k;
  for (int i = 0; i < 10; ++i) step_nodal(s, k, {static_cast<double>(i % 2), 0.0}, 0.2, 0.3);
  EXPECT_EQ(s.evaluate(k, 0.0), 0.0);
}

TEST(StepNodal, DivergentStepRejected) {
  NodalState s;
  TwoPointKernel k;
  EXPECT_THROW(step_nodal(s, k, {0.0, 1.0}, 2.0, 0.5), DivergenceError);
  SpectralState sp(3);
  const SpectralModel m = SpectralModel::from_regression(EigenSystem(Eigen::Vector3d(1, .5, .25)), 1.0,
                                                         Eigen::Vector3d(1, 1, 1), 0.0);
  EXPECT_THROW(step_spectral(sp, m, {0.1, 1.0}, 1.0, 1.0), DivergenceError);
}

TEST(StepSpectral, MatchesNodalPointwise) {
  const SpectralModel m = SpectralModel::from_params({});
  MercerKernel k(m);
  NodalState nodal;
  SpectralState spec(m.modes());
  const Sample z1{0.2, 1.0}, z2{0.7, 1.0};
  step_nodal(nodal, k, z1, 0.1, 0.1);
  step_spectral(spec, m, z1, 0.1, 0.1);
  step_nodal(nodal, k, z2, 0.1, 0.1);
  step_spectral(spec, m, z2, 0.1, 0.1);
  for (int i = 0; i <= 20; ++i) {
    const double x = i / 20.0;
    const double nodal_value = nodal.scale * (nodal.coeffs[0] * oracle::kernel(m.mu(), 0.2, x) +
                                              nodal.coeffs[1] * oracle::kernel(m.mu(), 0.7, x));
    EXPECT_NEAR(eval_function(m, spec.f, x), nodal_value, 1e-12);
  }
}

TEST(StepSpectral, ZeroGainLeavesStateUnchanged) {
  const SpectralModel m = SpectralModel::from_params({});
  SpectralState s(m.modes());
  s.f = m.regression();
  step_spectral(s, m, {0.3, 5.0}, 0.0, 0.4);
  EXPECT_EQ(s.f.coeffs, m.regression().coeffs);
}

TEST(StepSpectral, NoiselessFixedPoint) {
  ModelParams p;
  p.sigma = 0.0;
  const SpectralModel m = SpectralModel::from_params(p);
  SpectralState s(m.modes());
  s.f = m.regression();
  Rng rng(1);
  for (int i = 0; i < 5; ++i) step_spectral(s, m, draw_sample(m, rng), 0.1, 0.0);
  EXPECT_LE((s.f.coeffs - m.regression().coeffs).norm(), 1e-12);
}

TEST(Checkpoints, Geometric) {
  const auto cps = geometric_checkpoints(200);
  const std::vector<std::size_t> expected{0, 64, 76, 91, 108, 128, 152, 181, 200};
  EXPECT_EQ(cps, expected);
  EXPECT_EQ(geometric_checkpoints(0), std::vector<std::size_t>{0});
  EXPECT_EQ(geometric_checkpoints(10), (std::vector<std::size_t>{0, 10}));
}

TEST(Run, ZeroHorizon) {
  const SpectralModel m = SpectralModel::from_params({});
  RunOptions opt;
  opt.horizon = 0;
  const ErrorTrace tr = run(m, reference_schedule(m), opt);
  ASSERT_EQ(tr.rows.size(), 1u);
  EXPECT_EQ(tr.rows[0].t, 0u);
  EXPECT_DOUBLE_EQ(tr.rows[0].err_rho, norm_rho(m.regression()));
  EXPECT_DOUBLE_EQ(tr.rows[0].err_K, norm_K(m, m.regression()));
  EXPECT_EQ(tr.rows[0].fnorm_K, 0.0);
}

TEST(Run, Deterministic) {
  const SpectralModel m = SpectralModel::from_params({});
  RunOptions opt;
  opt.horizon = 3000;
  opt.seed = 77;
  const ErrorTrace a = run(m, reference_schedule(m), opt);
  const ErrorTrace b = run(m, reference_schedule(m), opt);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].err_rho, b.rows[i].err_rho);
    EXPECT_EQ(a.rows[i].err_K, b.rows[i].err_K);
    EXPECT_EQ(a.rows[i].comp.samp_direct, b.rows[i].comp.samp_direct);
  }
  EXPECT_EQ(a.final_f.coeffs, b.final_f.coeffs);
}

TEST(Run, CheckpointValidation) {
  const SpectralModel m = SpectralModel::from_params({});
  RunOptions opt;
  opt.horizon = 10;
  opt.checkpoints = {0, 5, 11};
  EXPECT_THROW(run(m, reference_schedule(m), opt), RangeError);
  opt.checkpoints = {0, 5, 5};
  EXPECT_THROW(run(m, reference_schedule(m), opt), RangeError);
}

TEST(Run, NodalMatchesSpectralAcrossScaleFolds) {
  const SpectralModel m = SpectralModel::from_params({});
  RunOptions opt;
  opt.horizon = 2100;  // two scale folds
  opt.seed = 5;
  opt.checkpoints = {0, 1023, 1024, 1025, 2048, 2100};
  const ErrorTrace s = run(m, reference_schedule(m), opt);
  opt.rep = Representation::kNodal;
  const ErrorTrace n = run(m, reference_schedule(m), opt);
  EXPECT_LE((s.final_f.coeffs - n.final_f.coeffs).norm(), 1e-10);
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    EXPECT_NEAR(s.rows[i].err_rho, n.rows[i].err_rho, 1e-10);
    EXPECT_NEAR(s.rows[i].fnorm_K, n.rows[i].fnorm_K, 1e-9);
  }
  EXPECT_TRUE(std::isnan(n.rows.back().comp.samp_direct));
}

TEST(Run, IterateBoundHoldsOnShortRun) {
  const SpectralModel m = SpectralModel::from_params({});
  RunOptions opt;
  opt.horizon = 5000;
  const ErrorTrace tr = run(m, reference_schedule(m), opt);
  EXPECT_TRUE(tr.iterate_bound_checked);
  EXPECT_EQ(tr.iterate_bound_violations, 0u);
  EXPECT_EQ(tr.contraction_violations, 0u);
  EXPECT_LT(tr.max_iterate_bound_ratio, 1.0);
}

TEST(Representation, Names) {
  EXPECT_EQ(parse_representation("nodal"), Representation::kNodal);
  EXPECT_EQ(representation_name(Representation::kSpectral), "spectral");
  EXPECT_THROW(parse_representation("fourier"), RangeError);
}
