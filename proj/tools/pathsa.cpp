// pathsa: online regularized least squares experiments.
//
// Exit status: 0 success, 1 a verification check failed, 2 bad invocation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pathsa/concentration.hpp"
#include "pathsa/config.hpp"
#include "pathsa/error.hpp"
#include "pathsa/experiment.hpp"
#include "pathsa/hilbert_sa.hpp"
#include "pathsa/online_learner.hpp"
#include "pathsa/reg_path.hpp"
#include "pathsa/text_format.hpp"

namespace fs = std::filesystem;
using namespace pathsa;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) { return std::isnan(v) ? "nan" : format_double(v); }

std::string short_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << body;
}

// Keeps every output inside the output directory.
fs::path output_file(const CliConfig& cfg, const std::string& name) {
  const fs::path rel(name);
  if (rel.empty() || rel.is_absolute()) throw UsageError("output name must be a relative path: " + name);
  for (const auto& part : rel)
    if (part == "..") throw UsageError("output name may not leave the output directory: " + name);
  fs::create_directories(cfg.out_dir / rel.parent_path());
  return cfg.out_dir / rel;
}

void write_manifest(const CliConfig& cfg, const SpectralModel& model) {
  write_file(output_file(cfg, "manifest.txt"), cfg.manifest(model));
}

int cmd_simulate(const CliConfig& cfg) {
  const SpectralModel model = SpectralModel::from_params(cfg.model);
  const Schedule schedule = cfg.schedule(model);
  if (!schedule.thmA_ok) std::cerr << "warning: schedule outside the convergence regime: " << schedule.describe() << '\n';
  RunOptions opt;
  opt.rep = cfg.rep;
  opt.horizon = cfg.horizon();
  opt.seed = cfg.seed;
  const ErrorTrace trace = run(model, schedule, opt);
  write_file(output_file(cfg, cfg.out), trace_csv(trace, false));
  write_manifest(cfg, model);
  if (trace.iterate_bound_violations > 0) {
    std::cerr << "iterate bound violated at " << trace.iterate_bound_violations << " steps\n";
    return kCheckFailed;
  }
  return kOk;
}

int cmd_path(const CliConfig& cfg) {
  const SpectralModel model = SpectralModel::from_params(cfg.model);
  if (!(cfg.lambda_min > 0.0) || !(cfg.lambda_max >= cfg.lambda_min))
    throw RangeError("need 0 < lambda_min <= lambda_max");
  std::ostringstream os;
  os << "lambda,norm_K,norm_rho,approx_err_rho,approx_err_K\n";
  bool ok = true;
  const std::size_t n = cfg.path_points;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    const double lambda = cfg.lambda_min * std::pow(cfg.lambda_max / cfg.lambda_min, u);
    const PathPoint p = tikhonov_solution(model, lambda);
    const double nk = norm_K(model, p.f_lambda);
    const double nr = norm_rho(p.f_lambda);
    ok = ok && nk <= model.M_rho() / std::sqrt(lambda) && nr <= model.M_rho() && tikhonov_residual(model, p) <= 1e-12;
    os << fmt(lambda) << ',' << fmt(nk) << ',' << fmt(nr) << ',' << fmt(p.approx_err_rho) << ','
       << fmt(p.approx_err_K) << '\n';
  }
  write_file(output_file(cfg, "path.csv"), os.str());
  write_manifest(cfg, model);
  return ok ? kOk : kCheckFailed;
}

int cmd_verify_drift(const CliConfig& cfg) {
  std::vector<DriftQuery> grid;
  for (double r : cfg.drift_r) {
    if (!(r > 0.0)) throw RangeError("drift_r values must be positive");
    for (char letter : cfg.clauses) {
      const DriftClause c = parse_clause(letter);
      if (!clause_valid(c, r)) {
        if (cfg.clauses_explicit)
          throw RangeError(std::string("clause ") + letter + " is not valid for r = " + short_num(r));
        continue;
      }
      for (int i = 1; i <= cfg.kmax; ++i)
        for (int j = 1; j <= cfg.kmax; ++j) grid.push_back({std::ldexp(1.0, -i), std::ldexp(1.0, -j), r, c});
    }
  }
  std::ostringstream os;
  os << "lambda,mu,r,clause,measured,bound,pass\n";
  bool ok = true;
  for (double r : cfg.drift_r) {
    ModelParams mp = cfg.model;
    mp.r = r;
    const SpectralModel model = SpectralModel::from_params(mp);
    std::vector<DriftQuery> sub;
    for (const DriftQuery& q : grid)
      if (q.r == r) sub.push_back(q);
    for (const DriftCheck& c : verify_drift_inequalities(model, sub)) {
      ok = ok && c.pass;
      os << fmt(c.query.lambda) << ',' << fmt(c.query.mu) << ',' << fmt(r) << ',' << clause_letter(c.query.clause)
         << ',' << fmt(c.measured) << ',' << fmt(c.bound) << ',' << (c.pass ? 1 : 0) << '\n';
    }
  }
  write_file(output_file(cfg, "drift.csv"), os.str());
  write_manifest(cfg, SpectralModel::from_params(cfg.model));
  return ok ? kOk : kCheckFailed;
}

double rel_err(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact) {
  const double scale = exact.norm();
  return (approx - exact).norm() / (scale > 0.0 ? scale : 1.0);
}

int cmd_verify_decomp(const CliConfig& cfg) {
  const std::size_t T = cfg.horizon();
  std::ostringstream os;
  os << "trial,t,reversed_rel_err,martingale_rel_err,pi_bound_margin\n";
  bool ok = true;
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t seed = cfg.seed + trial;
    const FiniteProblem p = random_problem(static_cast<Eigen::Index>(cfg.dim), cfg.outcomes, T, seed);
    const TrajectoryRecord rec = iterate(p, T, seed);
    for (std::size_t t = 1; t <= T; ++t) {
      const DecompositionTerms rv = reversed_decomposition_terms(rec, p, 0, t);
      const DecompositionTerms mg = martingale_decomposition_terms(rec, p, 0, t);
      const double e_rev = rel_err(rv.init - rv.sample - rv.drift, rec.remainders[t]);
      const double e_mart = rel_err(mg.init + mg.sample - mg.drift, rec.remainders[t]);
      const ContractionCheck cc = contraction_bound_check(rec, p, 1, t);
      const double margin = cc.bound - cc.measured;
      ok = ok && e_rev <= 1e-10 && e_mart <= 1e-10 && cc.precondition_ok && margin >= -1e-12;
      os << trial << ',' << t << ',' << fmt(e_rev) << ',' << fmt(e_mart) << ',' << fmt(margin) << '\n';
    }
  }
  write_file(output_file(cfg, "decomp.csv"), os.str());
  write_manifest(cfg, SpectralModel::from_params(cfg.model));
  return ok ? kOk : kCheckFailed;
}

int cmd_bounds(const CliConfig& cfg) {
  const double s2 = cfg.bound_sigma * cfg.bound_sigma;
  std::ostringstream os;
  os << "eps,bennett,bernstein\n";
  bool ok = true;
  for (double e : cfg.eps) {
    const double be = bennett_tail(cfg.M, s2, e);
    const double bs = bernstein_tail(cfg.M, s2, e);
    ok = ok && be <= bs;
    os << fmt(e) << ',' << fmt(be) << ',' << fmt(bs) << '\n';
  }
  os << "# radius(delta) = " << fmt(high_prob_radius(cfg.M, cfg.bound_sigma, cfg.delta)) << '\n';
  write_file(output_file(cfg, "bounds.csv"), os.str());
  write_manifest(cfg, SpectralModel::from_params(cfg.model));
  return ok ? kOk : kCheckFailed;
}

int cmd_coverage(const CliConfig& cfg) {
  const SpectralModel model = SpectralModel::from_params(cfg.model);
  MartingaleSpec spec;
  if (cfg.generator == "rademacher") spec = rademacher_generator(cfg.M);
  else if (cfg.generator == "sphere") spec = sphere_generator(3, cfg.M);
  else if (cfg.generator == "zero") spec = zero_generator();
  else spec = learner_generator(model, cfg.schedule(model));
  const CoverageResult res =
      coverage_test(spec, cfg.coverage_t, cfg.delta, cfg.paths, cfg.seed, cfg.radius_scale, cfg.threads);
  std::ostringstream os;
  os << "generator,t,delta,paths,radius,violations,rate,upper_limit_99\n"
     << spec.name << ',' << cfg.coverage_t << ',' << fmt(cfg.delta) << ',' << cfg.paths << ',' << fmt(res.radius)
     << ',' << res.violations << ',' << fmt(res.rate) << ',' << fmt(res.upper_limit) << '\n';
  write_file(output_file(cfg, "coverage.csv"), os.str());
  write_manifest(cfg, model);
  return res.upper_limit <= cfg.delta ? kOk : kCheckFailed;
}

int cmd_rates(const CliConfig& cfg) {
  const SpectralModel model = SpectralModel::from_params(cfg.model);
  const Schedule schedule = cfg.schedule(model);
  std::cerr << "schedule: " << schedule.describe() << '\n';
  ExperimentConfig ec;
  ec.horizon = cfg.horizon();
  ec.replicates = cfg.replicates;
  ec.base_seed = cfg.seed;
  ec.rep = cfg.rep;
  ec.delta = cfg.delta;
  ec.fit_t_min = cfg.fit_t_min;
  ec.fit_t_max = cfg.fit_t_max;
  ec.threads = cfg.threads;
  const ExperimentResult res = run_replicates(model, schedule, ec);
  write_artifacts(res, cfg.out_dir);
  write_manifest(cfg, model);
  if (res.fit_ok)
    std::cerr << "slope rho " << fmt(res.fit_rho.slope) << " (theory " << fmt(res.fit_rho.theoretical_slope)
              << "), K " << fmt(res.fit_K.slope) << " (theory " << fmt(res.fit_K.theoretical_slope) << ")\n";
  bool ok = res.failures.empty();
  for (const BoundReport& b : res.bounds_C)
    if (b.in_regime && !b.holds) ok = false;
  for (const BoundReport& b : res.bounds_B)
    if (b.in_regime && !b.holds) ok = false;
  return ok ? kOk : kCheckFailed;
}

struct Flag {
  CLI::App* sub;
  CLI::Option* opt;
  std::string key;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online regularized least squares: simulation, identity checks and rate experiments"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path;
  std::string out_dir;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out-dir", out_dir, "output directory (default $PATHSA_OUTPUT_DIR or .)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  std::map<std::string, std::string> values;
  std::vector<Flag> flags;
  auto flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    flags.push_back({sub, sub->add_option(name, values[sub->get_name() + "/" + key], help), key});
  };
  auto model_flags = [&](CLI::App* sub) {
    flag(sub, "--modes", "modes", "truncation N");
    flag(sub, "--mu-decay", "mu_decay", "eigenvalue decay exponent");
    flag(sub, "--source-decay", "source_decay", "source coefficient decay exponent");
    flag(sub, "--r", "r", "regularity");
    flag(sub, "--sigma", "sigma", "noise half-width");
  };
  auto schedule_flags = [&](CLI::App* sub) {
    flag(sub, "--theta", "theta", "step exponent (auto: 2r/(2r+1))");
    flag(sub, "--a", "a", "step scale");
    flag(sub, "--b", "b", "regularization scale (auto: 1/a)");
    flag(sub, "--t0", "t0", "schedule offset (auto: smallest valid)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "one run of the online recursion");
  model_flags(sim);
  schedule_flags(sim);
  flag(sim, "--T", "T", "horizon");
  flag(sim, "--seed", "seed", "rng seed");
  flag(sim, "--rep", "rep", "nodal|spectral");
  flag(sim, "--out", "out", "trace CSV name inside the output directory");

  CLI::App* path = app.add_subcommand("path", "regularization path on a log grid");
  model_flags(path);
  flag(path, "--points", "path_points", "grid size");
  flag(path, "--lambda-min", "lambda_min", "smallest lambda");
  flag(path, "--lambda-max", "lambda_max", "largest lambda");

  CLI::App* drift = app.add_subcommand("verify-drift", "check the drift inequalities on a grid");
  flag(drift, "--r", "drift_r", "comma-separated regularities");
  flag(drift, "--clause", "clauses", "letters from ABCDE");
  flag(drift, "--kmax", "kmax", "grid 2^-1 .. 2^-kmax");

  CLI::App* decomp = app.add_subcommand("verify-decomp", "check both remainder decompositions");
  flag(decomp, "--dim", "dim", "dimension");
  flag(decomp, "--outcomes", "outcomes", "sample space size");
  flag(decomp, "--T", "T", "horizon");
  flag(decomp, "--trials", "trials", "random instances");
  flag(decomp, "--seed", "seed", "first instance seed");

  CLI::App* bounds = app.add_subcommand("bounds", "tail bounds on an eps grid");
  flag(bounds, "--M", "M", "increment bound");
  flag(bounds, "--sigma", "bound_sigma", "sigma_t");
  flag(bounds, "--delta", "delta", "confidence level for the radius");
  flag(bounds, "--eps", "eps", "comma-separated eps grid");

  CLI::App* cov = app.add_subcommand("coverage", "Monte Carlo coverage of the deviation radius");
  flag(cov, "--paths", "paths", "number of paths");
  flag(cov, "--t", "coverage_t", "path length");
  flag(cov, "--delta", "delta", "confidence level");
  flag(cov, "--generator", "generator", "rademacher|sphere|learner|zero");
  flag(cov, "--M", "M", "increment bound");
  flag(cov, "--radius-scale", "radius_scale", "multiplier on the radius");
  flag(cov, "--seed", "seed", "rng seed");

  CLI::App* rates = app.add_subcommand("rates", "replicated runs, bounds and rate fits");
  std::string rates_config;
  rates->add_option("config", rates_config, "configuration file");
  model_flags(rates);
  schedule_flags(rates);
  flag(rates, "--T", "T", "horizon");
  flag(rates, "--replicates", "replicates", "number of replicates");
  flag(rates, "--seed", "seed", "first replicate seed");
  flag(rates, "--rep", "rep", "nodal|spectral");
  flag(rates, "--delta", "delta", "confidence level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    CliConfig cfg;
    if (!rates_config.empty()) config_path = rates_config;
    if (!config_path.empty()) cfg = parse_config(read_file(config_path));
    cfg.command = chosen->get_name();
    for (const Flag& f : flags)
      if (f.opt->count() > 0 && f.sub == chosen)
        cfg.set(f.key, values[chosen->get_name() + "/" + f.key]);
    cfg.threads = threads;
    cfg.out_dir = out_dir.empty() ? default_output_dir() : fs::path(out_dir);
    fs::create_directories(cfg.out_dir);
    cfg.model.validate();

    const std::string& name = cfg.command;
    if (name == "simulate") return cmd_simulate(cfg);
    if (name == "path") return cmd_path(cfg);
    if (name == "verify-drift") return cmd_verify_drift(cfg);
    if (name == "verify-decomp") return cmd_verify_decomp(cfg);
    if (name == "bounds") return cmd_bounds(cfg);
    if (name == "coverage") return cmd_coverage(cfg);
    if (name == "rates") return cmd_rates(cfg);
    std::cerr << "unknown subcommand " << name << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "range error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}
