#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pathsa/decomposition.hpp"
#include "pathsa/error.hpp"
#include "pathsa/experiment.hpp"
#include "pathsa/reg_path.hpp"

using namespace pathsa;

namespace {

SpectralModel model_with_r(double r) {
  ModelParams p;
  p.r = r;
  return SpectralModel::from_params(p);
}

Schedule reference_schedule(const SpectralModel& m) {
  const double r = m.regularity();
  const double theta = theta_for_regularity(r);
  return Schedule::make(4.0, 0.25, theta, minimal_t0(4.0, 0.25, theta, m.kappa(), r), r, m.kappa());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(KNormBound, ConstantsAtRegularityOne) {
  const SpectralModel m = model_with_r(1.0);
  const Schedule s = reference_schedule(m);
  const BoundReport b = theorem_b_bound(m, s, 4096, 0.1);
  ASSERT_EQ(b.constants.size(), 3u);
  EXPECT_NEAR(b.constants[1].second, 18.0 / 5.0 * m.source_coeffs().norm(), 1e-12);
  EXPECT_NEAR(b.constants[0].second, 2.0 * std::pow(s.t0, 7.0 / 6.0) * m.M_rho(), 1e-9);
  EXPECT_NEAR(b.constants[2].second, 20.0 * std::pow(m.kappa() + 1.0, 2) * m.M_rho() / m.kappa(), 1e-12);
  EXPECT_NEAR(b.exponent, 1.0 / 6.0, 1e-15);
  const double tbar = 4096 + s.t0;
  const double expected = b.constants[0].second / tbar +
                          (b.constants[1].second * std::pow(4.0, -0.5) * std::log(20.0) + b.constants[2].second * 4.0) *
                              std::pow(tbar, -1.0 / 6.0);
  EXPECT_NEAR(b.value, expected, 1e-9 * expected);
  EXPECT_TRUE(b.in_regime);
}

TEST(KNormBound, Rejections) {
  const SpectralModel m = model_with_r(1.0);
  EXPECT_THROW(theorem_b_bound(m, reference_schedule(m), 10, 2.0), RangeError);
  const SpectralModel half = model_with_r(0.5);
  EXPECT_THROW(theorem_b_bound(half, reference_schedule(half), 10, 0.1), RangeError);
}

TEST(L2Bound, ConstantsAtRegularityOne) {
  const SpectralModel m = model_with_r(1.0);
  const Schedule s = reference_schedule(m);
  const BoundReport c = theorem_c_bound(m, s, 4096, 0.1);
  ASSERT_EQ(c.constants.size(), 5u);
  EXPECT_NEAR(c.constants[0].second, 2.0 * m.M_rho() * s.t0, 1e-9);
  EXPECT_NEAR(c.constants[1].second, 3.0 * m.source_coeffs().norm(), 1e-12);
  EXPECT_NEAR(c.constants[2].second, 10.0 * m.kappa() * m.M_rho(), 1e-12);
  EXPECT_NEAR(c.constants[3].second, 63.0 * m.kappa_sq() * m.M_rho(), 1e-10);
  EXPECT_NEAR(c.constants[4].second, 50.0 * m.kappa_sq() * m.M_rho() * std::pow(s.t0, -1.0 / 6.0), 1e-10);
  EXPECT_NEAR(c.exponent, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.third_exponent, 0.5, 1e-15);
  EXPECT_NEAR(c.alt_exponent, 5.0 / 6.0, 1e-15);
  ASSERT_EQ(c.terms.size(), 3u);
  EXPECT_NEAR(c.value, c.terms[0] + c.terms[1] + c.terms[2], 1e-12 * c.value);
  for (double t : c.terms) EXPECT_LE(t, c.terms[c.dominant_term]);
  EXPECT_TRUE(c.in_regime);
  EXPECT_LE(c.alt_value, c.value);
}

TEST(L2Bound, ExponentAtHalf) {
  const SpectralModel m = model_with_r(0.5);
  const BoundReport c = theorem_c_bound(m, reference_schedule(m), 100, 0.1);
  EXPECT_NEAR(c.exponent, 0.25, 1e-15);
  EXPECT_NEAR(c.constants[1].second, 3.5 / 0.75 * m.source_coeffs().norm(), 1e-12);
}

TEST(L2Bound, Rejections) {
  const SpectralModel m = model_with_r(1.0);
  EXPECT_THROW(theorem_c_bound(m, reference_schedule(m), 10, 2.0), RangeError);
  EXPECT_THROW(theorem_c_bound(m, reference_schedule(m), 10, 0.0), RangeError);
  const SpectralModel smooth = model_with_r(1.2);
  EXPECT_THROW(theorem_c_bound(smooth, reference_schedule(smooth), 10, 0.1), RangeError);
}

TEST(L2Bound, OutOfRegimeFlagged) {
  const SpectralModel m = model_with_r(1.0);
  const Schedule early = Schedule::make(4.0, 0.25, 2.0 / 3.0, 10.0, 1.0, m.kappa());
  EXPECT_FALSE(theorem_c_bound(m, early, 100, 0.1).in_regime);
}

TEST(FitRate, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (int k = 6; k <= 17; ++k) pts.emplace_back(std::ldexp(1.0, k), std::pow(std::ldexp(1.0, k), -1.0 / 3.0));
  const RateFit f = fit_rate(pts, 0.0, 1e9, -1.0 / 3.0);
  EXPECT_NEAR(f.slope, -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(f.intercept, 0.0, 1e-10);
  EXPECT_NEAR(f.residual, 0.0, 1e-12);
  EXPECT_EQ(f.points, 12u);
}

TEST(FitRate, ConstantAndWindow) {
  std::vector<std::pair<double, double>> pts;
  for (int k = 1; k <= 10; ++k) pts.emplace_back(k * 10.0, 5.0);
  EXPECT_NEAR(fit_rate(pts, 0.0, 1e9).slope, 0.0, 1e-14);
  EXPECT_NEAR(fit_rate(pts, 0.0, 1e9).intercept, std::log(5.0), 1e-14);
  EXPECT_THROW(fit_rate(pts, 15.0, 45.0), RangeError);  // 3 points
  pts[2].second = 0.0;
  EXPECT_THROW(fit_rate(pts, 0.0, 1e9), RangeError);
}

TEST(Quantile, TypeSeven) {
  EXPECT_NEAR(quantile({1, 2, 3, 4}, 0.9), 3.7, 1e-15);
  EXPECT_EQ(quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_EQ(quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_EQ(median({5, 1, 3}), 3.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(quantile({7}, 0.3), 7.0);
  EXPECT_THROW(quantile({}, 0.5), RangeError);
}

TEST(Decompose, AtStart) {
  const SpectralModel m = model_with_r(1.0);
  const Schedule s = reference_schedule(m);
  const ErrorComponents c = decompose_errors(m, s, SpectralVector::zeros(m.modes()), 0);
  const PathPoint p0 = tikhonov_solution(m, schedule_values(s, 0).lambda);
  EXPECT_NEAR(c.init, norm_rho(p0.f_lambda), 1e-14);
  EXPECT_NEAR(c.approx, p0.approx_err_rho, 1e-14);
  EXPECT_EQ(c.drift, 0.0);
  EXPECT_NEAR(c.samp, 0.0, 1e-14);
}

TEST(Decompose, ZeroTargetNoiselessIsAllZero) {
  const SpectralModel m = SpectralModel::from_regression(EigenSystem::power_law(32, 2.0), 1.0,
                                                         Eigen::VectorXd::Zero(32), 0.0);
  const Schedule s = Schedule::make(1.0, 1.0, 1.0, 5.0, 1.0, m.kappa());  // constant lambda
  RunOptions o;
  o.horizon = 500;
  for (const TraceRow& row : run(m, s, o).rows) {
    EXPECT_EQ(row.comp.init, 0.0);
    EXPECT_EQ(row.comp.drift, 0.0);
    EXPECT_EQ(row.comp.samp, 0.0);
  }
}

TEST(Decompose, ConstantLambdaHasNoDrift) {
  const SpectralModel m = model_with_r(1.0);
  const Schedule s = Schedule::make(0.5, 0.3, 1.0, 5.0, 1.0, m.kappa());
  RunOptions o;
  o.horizon = 300;
  for (const TraceRow& row : run(m, s, o).rows) EXPECT_EQ(row.comp.drift, 0.0);
}

TEST(Decompose, StandaloneMatchesTracker) {
  const SpectralModel m = model_with_r(1.0);
  const Schedule s = reference_schedule(m);
  RunOptions o;
  o.horizon = 700;
  o.checkpoints = {0, 1, 13, 700};
  const ErrorTrace tr = run(m, s, o);
  // run() only keeps the final iterate; compare at the horizon.
  const ErrorComponents c = decompose_errors(m, s, tr.final_f, 700);
  const ErrorComponents& d = tr.rows.back().comp;
  EXPECT_NEAR(c.init, d.init, 1e-12);
  EXPECT_NEAR(c.approx, d.approx, 1e-14);
  EXPECT_NEAR(c.drift, d.drift, 1e-12);
  EXPECT_NEAR(c.samp, d.samp, 1e-12);
  EXPECT_TRUE(std::isnan(c.samp_direct));
  EXPECT_THROW(decompose_errors(m, s, SpectralVector::zeros(3), 5), DimensionError);
}

TEST(Decompose, TrianglesIdentityAndOracle) {
  const SpectralModel m = model_with_r(1.0);
  const Schedule s = reference_schedule(m);
  RunOptions o;
  o.horizon = 20000;
  o.seed = 4;
  for (const TraceRow& row : run(m, s, o).rows) {
    EXPECT_LE(row.rem_rho, (row.comp.init + row.comp.samp + row.comp.drift) * (1 + 1e-9) + 1e-15);
    EXPECT_LE(row.err_rho, (row.rem_rho + row.comp.approx) * (1 + 1e-9));
    if (row.t > 0) {
      EXPECT_NEAR(row.comp.samp, row.comp.samp_direct, 1e-8 * row.comp.samp_direct);
    }
    const PathPoint p = tikhonov_solution(m, row.lambda);
    EXPECT_NEAR(row.comp.approx, p.approx_err_rho, 1e-12);
    const Eigen::VectorXd dense = oracle::tikhonov_dense(m.mu(), m.regression().coeffs, row.lambda);
    EXPECT_NEAR(row.comp.approx, (dense - m.regression().coeffs).norm(), 1e-12);
  }
}

TEST(Decompose, ApproxToDriftRatioStaysInBand) {
  // Oracle run over [2^10, 2^17] measured the ratio between 43.1 and 61.6.
  const SpectralModel m = model_with_r(1.0);
  const Schedule s = reference_schedule(m);
  DecompositionTracker tracker(m, s, false);
  const auto cps = geometric_checkpoints(1u << 17);
  std::size_t next = 0;
  const Eigen::VectorXd f = Eigen::VectorXd::Zero(m.modes());
  double lo = 1e300, hi = 0.0;
  for (std::size_t t = 1; t <= (1u << 17); ++t) {
    const StepSizes st = schedule_values(s, t);
    tracker.advance(st.gamma, st.lambda);
    while (next < cps.size() && cps[next] < t) ++next;
    if (next < cps.size() && cps[next] == t && t >= 1024) {
      const ErrorComponents c = tracker.components(f);
      lo = std::min(lo, c.approx / c.drift);
      hi = std::max(hi, c.approx / c.drift);
    }
  }
  EXPECT_GE(lo, 40.0);
  EXPECT_LE(hi, 65.0);
}

TEST(Replicates, DeterministicAcrossThreadCounts) {
  const SpectralModel m = model_with_r(1.0);
  const Schedule s = reference_schedule(m);
  ExperimentConfig cfg;
  cfg.horizon = 3000;
  cfg.replicates = 4;
  cfg.base_seed = 10;
  const ExperimentResult a = run_replicates(m, s, cfg);
  cfg.threads = 3;
  const ExperimentResult b = run_replicates(m, s, cfg);
  ASSERT_EQ(a.traces.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.traces[i].seed, 10 + i);
    EXPECT_EQ(trace_csv(a.traces[i], true), trace_csv(b.traces[i], true));
  }
  EXPECT_TRUE(a.fit_ok);
  EXPECT_EQ(a.fit_rho.slope, b.fit_rho.slope);

  const auto dir = std::filesystem::temp_directory_path() / "pathsa_artifacts_test";
  std::filesystem::remove_all(dir);
  write_artifacts(a, dir / "one");
  write_artifacts(b, dir / "two");
  for (const char* f : {"summary.csv", "ratefit.txt", "traces/10.csv", "traces/13.csv"})
    EXPECT_EQ(slurp(dir / "one" / f), slurp(dir / "two" / f)) << f;
  EXPECT_FALSE(std::filesystem::exists(dir / "one" / "failures.txt"));
  std::filesystem::remove_all(dir);
}

TEST(Replicates, SummaryUsesReplicateStatistics) {
  const SpectralModel m = model_with_r(1.0);
  const Schedule s = reference_schedule(m);
  ExperimentConfig cfg;
  cfg.horizon = 500;
  cfg.replicates = 5;
  cfg.checkpoints = {0, 100, 500};
  const ExperimentResult r = run_replicates(m, s, cfg);
  ASSERT_EQ(r.summary.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> e;
    for (const auto& tr : r.traces) e.push_back(tr.rows[i].err_rho);
    EXPECT_EQ(r.summary[i].median_err_rho, median(e));
    EXPECT_EQ(r.summary[i].q_err_rho, quantile(e, 0.9));
  }
  EXPECT_FALSE(r.fit_ok);  // too few checkpoints
  EXPECT_FALSE(r.fit_error.empty());
}

TEST(Replicates, SingleReplicateZeroHorizon) {
  const SpectralModel m = model_with_r(1.0);
  ExperimentConfig cfg;
  cfg.horizon = 0;
  const ExperimentResult r = run_replicates(m, reference_schedule(m), cfg);
  ASSERT_EQ(r.summary.size(), 1u);
  EXPECT_EQ(r.summary[0].t, 0u);
  EXPECT_FALSE(r.fit_ok);
}
