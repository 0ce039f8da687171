#include "pathsa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "pathsa/error.hpp"
#include "pathsa/text_format.hpp"

namespace pathsa {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw RangeError("delta must lie in (0, 1)");
}

void finish(BoundReport& rep) {
  rep.value = 0.0;
  for (double v : rep.terms) rep.value += v;
  rep.dominant_term = static_cast<int>(std::max_element(rep.terms.begin(), rep.terms.end()) - rep.terms.begin());
}

std::string fmt(double v) { return std::isnan(v) ? "nan" : format_double(v); }

}  // namespace

BoundReport theorem_b_bound(const SpectralModel& model, const Schedule& schedule, std::size_t t, double delta) {
  check_delta(delta);
  const double r = model.regularity();
  if (!(r > 0.5 && r <= 1.5)) throw RangeError("H_K bound needs r in (1/2, 3/2]");
  const double tbar = static_cast<double>(t) + schedule.t0;
  const double m = model.M_rho();
  const double k = model.kappa();
  const double c0 = 2.0 * std::pow(schedule.t0, (4.0 * r + 3.0) / (4.0 * r + 2.0)) * m;
  const double c1 = (20.0 * r - 2.0) / ((2.0 * r - 1.0) * (2.0 * r + 3.0)) * model.source_norm(r);
  const double c2 = 20.0 * (k + 1.0) * (k + 1.0) * m / k;

  BoundReport rep;
  rep.t = t;
  rep.theorem = 'B';
  rep.constants = {{"C0", c0}, {"C1", c1}, {"C2", c2}};
  rep.exponent = (2.0 * r - 1.0) / (4.0 * r + 2.0);
  const double decay = std::pow(tbar, -rep.exponent);
  rep.terms = {c0 / tbar, c1 * std::pow(schedule.a, 0.5 - r) * std::log(2.0 / delta) * decay,
               c2 * schedule.a * decay};
  rep.in_regime = schedule.thmB_ok;
  finish(rep);
  return rep;
}

BoundReport theorem_c_bound(const SpectralModel& model, const Schedule& schedule, std::size_t t, double delta) {
  check_delta(delta);
  const double r = model.regularity();
  if (!(r >= 0.5 && r <= 1.0)) throw RangeError("L2 bound needs r in [1/2, 1]");
  const double tbar = static_cast<double>(t) + schedule.t0;
  const double m = model.M_rho();
  const double k2 = model.kappa_sq();
  const double a = schedule.a;
  const double d0 = 2.0 * m * schedule.t0;
  const double d1 = (5.0 * r + 1.0) / (r * (1.0 + r)) * model.source_norm(r);
  const double d2 = 10.0 * model.kappa() * m;
  const double d3 = 63.0 * k2 * m;
  const double d4 = 50.0 * k2 * m * std::pow(schedule.t0, 0.5 - schedule.theta);
  const double log_d = std::log(2.0 / delta);

  BoundReport rep;
  rep.t = t;
  rep.theorem = 'C';
  rep.constants = {{"D0", d0}, {"D1", d1}, {"D2", d2}, {"D3", d3}, {"D4", d4}};
  rep.exponent = r / (2.0 * r + 1.0);
  const double third_coeff = (std::pow(a, 1.5) * d3 * std::sqrt(std::log(tbar)) + std::pow(a, 2.5) * d4) * log_d * log_d;
  const double third_exp = (4.0 * r - 1.0) / (4.0 * r + 2.0);
  rep.terms = {d0 / tbar, (d1 * std::pow(a, -r) + std::sqrt(a) * d2 * log_d) * std::pow(tbar, -rep.exponent),
               third_coeff * std::pow(tbar, -third_exp)};
  rep.third_exponent = third_exp;
  rep.alt_exponent = (6.0 * r - 1.0) / (4.0 * r + 2.0);
  rep.alt_value = rep.terms[0] + rep.terms[1] + third_coeff * std::pow(tbar, -rep.alt_exponent);
  rep.in_regime = schedule.thmC_ok;
  finish(rep);
  return rep;
}

RateFit fit_rate(std::span<const std::pair<double, double>> points, double t_min, double t_max,
                 double theoretical_slope) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [t, e] : points) {
    if (t < t_min || t > t_max) continue;
    if (!(e > 0.0) || !(t > 0.0)) throw RangeError("rate fit needs positive t and error values");
    logs.emplace_back(std::log(t), std::log(e));
  }
  if (logs.size() < 4) throw RangeError("rate fit needs at least 4 points in the window");
  const double n = static_cast<double>(logs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw RangeError("rate fit needs distinct t values");
  RateFit fit;
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.points = logs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (const auto& [x, y] : logs) {
    const double res = y - (fit.intercept + fit.slope * x);
    ss += res * res;
  }
  fit.residual = std::sqrt(ss / n);
  fit.theoretical_slope = theoretical_slope;
  return fit;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw RangeError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw RangeError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

ExperimentResult run_replicates(const SpectralModel& model, const Schedule& schedule, const ExperimentConfig& cfg) {
  if (cfg.replicates < 1) throw RangeError("need at least one replicate");
  check_delta(cfg.delta);
  const std::vector<std::size_t> checkpoints =
      cfg.checkpoints.empty() ? geometric_checkpoints(cfg.horizon) : cfg.checkpoints;

  std::vector<ErrorTrace> traces(cfg.replicates);
  std::vector<std::exception_ptr> errors(cfg.replicates);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.replicates; i = next++) {
      try {
        RunOptions opt;
        opt.rep = cfg.rep;
        opt.horizon = cfg.horizon;
        opt.seed = cfg.base_seed + i;
        opt.checkpoints = checkpoints;
        traces[i] = run(model, schedule, opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.replicates)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  for (std::size_t i = 0; i < cfg.replicates; ++i) {
    if (errors[i]) {
      std::string what = "unknown error";
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      res.failures.emplace_back(cfg.base_seed + i, what);
    } else {
      res.traces.push_back(std::move(traces[i]));
    }
  }
  if (res.traces.empty()) return res;

  const double r = model.regularity();
  const bool has_b = r > 0.5 && r <= 1.5;
  const bool has_c = r >= 0.5 && r <= 1.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, double>> med_rho, med_K;

  for (std::size_t row = 0; row < checkpoints.size(); ++row) {
    std::vector<double> er, ek, ei, ea, ed, es;
    for (const ErrorTrace& tr : res.traces) {
      const TraceRow& x = tr.rows[row];
      er.push_back(x.err_rho);
      ek.push_back(x.err_K);
      ei.push_back(x.comp.init);
      ea.push_back(x.comp.approx);
      ed.push_back(x.comp.drift);
      es.push_back(x.comp.samp);
    }
    SummaryRow s{checkpoints[row], median(er), quantile(er, 1.0 - cfg.delta), median(ek),
                 quantile(ek, 1.0 - cfg.delta), nan, nan, median(ei), median(ea), median(ed), median(es)};
    if (has_b) {
      BoundReport b = theorem_b_bound(model, schedule, s.t, cfg.delta);
      b.measured = s.q_err_K;
      b.holds = b.measured <= b.value;
      s.bound_B = b.value;
      res.bounds_B.push_back(std::move(b));
    }
    if (has_c) {
      BoundReport c = theorem_c_bound(model, schedule, s.t, cfg.delta);
      c.measured = s.q_err_rho;
      c.holds = c.measured <= c.value;
      s.bound_C = c.value;
      res.bounds_C.push_back(std::move(c));
    }
    if (s.t > 0) {
      med_rho.emplace_back(static_cast<double>(s.t), s.median_err_rho);
      med_K.emplace_back(static_cast<double>(s.t), s.median_err_K);
    }
    res.summary.push_back(s);
  }

  double t_max = cfg.fit_t_max > 0.0 ? cfg.fit_t_max : static_cast<double>(cfg.horizon);
  double t_min = cfg.fit_t_min;
  if (t_min <= 0.0 && !med_rho.empty()) t_min = std::sqrt(med_rho.front().first * t_max);
  try {
    res.fit_rho = fit_rate(med_rho, t_min, t_max, -r / (2.0 * r + 1.0));
    res.fit_K = fit_rate(med_K, t_min, t_max, -(2.0 * r - 1.0) / (4.0 * r + 2.0));
    res.fit_ok = true;
  } catch (const RangeError& e) {
    res.fit_error = e.what();
  }
  return res;
}

std::string trace_csv(const ErrorTrace& trace, bool components) {
  std::ostringstream os;
  os << "t,err_rho,err_K,rem_rho,rem_K,fnorm_K,gamma,lambda";
  if (components) os << ",E_init,E_approx,E_drift,E_samp,E_samp_direct";
  os << '\n';
  for (const TraceRow& x : trace.rows) {
    os << x.t << ',' << fmt(x.err_rho) << ',' << fmt(x.err_K) << ',' << fmt(x.rem_rho) << ',' << fmt(x.rem_K)
       << ',' << fmt(x.fnorm_K) << ',' << fmt(x.gamma) << ',' << fmt(x.lambda);
    if (components)
      os << ',' << fmt(x.comp.init) << ',' << fmt(x.comp.approx) << ',' << fmt(x.comp.drift) << ','
         << fmt(x.comp.samp) << ',' << fmt(x.comp.samp_direct);
    os << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << body;
}

void describe_fit(std::ostream& os, const std::string& name, const RateFit& f) {
  os << name << ".t_min = " << fmt(f.t_min) << '\n'
     << name << ".t_max = " << fmt(f.t_max) << '\n'
     << name << ".points = " << f.points << '\n'
     << name << ".slope = " << fmt(f.slope) << '\n'
     << name << ".intercept = " << fmt(f.intercept) << '\n'
     << name << ".residual = " << fmt(f.residual) << '\n'
     << name << ".theoretical_slope = " << fmt(f.theoretical_slope) << '\n';
}

}  // namespace

void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "traces");
  for (const ErrorTrace& tr : result.traces)
    write_file(dir / "traces" / (std::to_string(tr.seed) + ".csv"), trace_csv(tr, true));

  std::ostringstream sum;
  sum << "t,median_err_rho,q_err_rho,median_err_K,bound_B,bound_C,E_init,E_approx,E_drift,E_samp\n";
  for (const SummaryRow& s : result.summary)
    sum << s.t << ',' << fmt(s.median_err_rho) << ',' << fmt(s.q_err_rho) << ',' << fmt(s.median_err_K) << ','
        << fmt(s.bound_B) << ',' << fmt(s.bound_C) << ',' << fmt(s.E_init) << ',' << fmt(s.E_approx) << ','
        << fmt(s.E_drift) << ',' << fmt(s.E_samp) << '\n';
  write_file(dir / "summary.csv", sum.str());

  std::ostringstream fit;
  if (result.fit_ok) {
    describe_fit(fit, "rho", result.fit_rho);
    describe_fit(fit, "K", result.fit_K);
  } else {
    fit << "# no fit: " << result.fit_error << '\n';
  }
  if (!result.bounds_C.empty()) {
    const BoundReport& c = result.bounds_C.front();
    fit << "C.third_term_exponent = " << fmt(c.third_exponent) << '\n'
        << "C.third_term_exponent_alt = " << fmt(c.alt_exponent) << '\n';
  }
  write_file(dir / "ratefit.txt", fit.str());

  if (!result.failures.empty()) {
    std::ostringstream fail;
    fail << "seed,error\n";
    for (const auto& [seed, what] : result.failures) fail << seed << ",\"" << what << "\"\n";
    write_file(dir / "failures.txt", fail.str());
  }
}

}  // namespace pathsa
