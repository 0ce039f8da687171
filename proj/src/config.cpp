#include "pathsa/config.hpp"

#include <cstdlib>
#include <sstream>

#include "pathsa/error.hpp"

namespace pathsa {

namespace {

std::size_t parse_count(const KeyValue& kv, bool allow_zero = false) {
  const long long v = parse_integer(kv.value, kv.line);
  if (v < 0 || (v == 0 && !allow_zero))
    throw ConfigError(kv.key + " must be a " + (allow_zero ? "nonnegative" : "positive") + " count", kv.line);
  return static_cast<std::size_t>(v);
}

std::optional<double> parse_auto(const KeyValue& kv) {
  if (kv.value == "auto") return std::nullopt;
  return parse_real(kv.value, kv.line);
}

std::vector<double> parse_list(const KeyValue& kv) {
  std::vector<double> out;
  std::string_view rest = kv.value;
  while (true) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    out.push_back(parse_real(item, kv.line));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

}  // namespace

void CliConfig::set(const KeyValue& kv) {
  const std::string& k = kv.key;
  if (model.set(kv)) return;
  if (k == "seed") {
    seed = parse_unsigned(kv.value, kv.line);
  } else if (k == "a") {
    a = parse_real(kv.value, kv.line);
  } else if (k == "b") {
    b = parse_auto(kv);
  } else if (k == "theta") {
    theta = parse_auto(kv);
  } else if (k == "t0") {
    t0 = parse_auto(kv);
  } else if (k == "T") {
    T = parse_count(kv, true);
  } else if (k == "rep") {
    try {
      rep = parse_representation(kv.value);
    } catch (const RangeError& e) {
      throw ConfigError(e.what(), kv.line);
    }
  } else if (k == "replicates") {
    replicates = parse_count(kv);
  } else if (k == "delta") {
    delta = parse_real(kv.value, kv.line);
  } else if (k == "fit_t_min") {
    fit_t_min = parse_real(kv.value, kv.line);
  } else if (k == "fit_t_max") {
    fit_t_max = parse_real(kv.value, kv.line);
  } else if (k == "out") {
    out = kv.value;
  } else if (k == "dim") {
    dim = parse_count(kv);
  } else if (k == "outcomes") {
    outcomes = parse_count(kv);
  } else if (k == "trials") {
    trials = parse_count(kv);
  } else if (k == "M") {
    M = parse_real(kv.value, kv.line);
  } else if (k == "bound_sigma") {
    bound_sigma = parse_real(kv.value, kv.line);
  } else if (k == "eps") {
    eps = parse_list(kv);
  } else if (k == "paths") {
    paths = parse_count(kv);
  } else if (k == "coverage_t") {
    coverage_t = parse_count(kv);
  } else if (k == "generator") {
    if (kv.value != "rademacher" && kv.value != "sphere" && kv.value != "learner" && kv.value != "zero")
      throw ConfigError("generator must be rademacher, sphere, learner or zero", kv.line);
    generator = kv.value;
  } else if (k == "radius_scale") {
    radius_scale = parse_real(kv.value, kv.line);
  } else if (k == "path_points") {
    path_points = parse_count(kv);
  } else if (k == "lambda_min") {
    lambda_min = parse_real(kv.value, kv.line);
  } else if (k == "lambda_max") {
    lambda_max = parse_real(kv.value, kv.line);
  } else if (k == "drift_r") {
    drift_r = parse_list(kv);
  } else if (k == "clauses") {
    if (kv.value == "auto") {
      clauses = "ABCDE";
      clauses_explicit = false;
      return;
    }
    for (char c : kv.value)
      if (c < 'A' || c > 'E') throw ConfigError("clauses must be letters from A..E", kv.line);
    clauses = kv.value;
    clauses_explicit = true;
  } else if (k == "kmax") {
    kmax = static_cast<int>(parse_count(kv));
  } else {
    throw ConfigError("unknown key '" + k + "'", kv.line);
  }
}

std::size_t CliConfig::horizon() const {
  if (T) return *T;
  if (command == "verify-decomp") return 50;
  if (command == "rates") return std::size_t{1} << 17;
  return 100000;
}

double CliConfig::resolved_theta() const { return theta ? *theta : theta_for_regularity(model.r); }

double CliConfig::resolved_b() const { return b ? *b : 1.0 / a; }

Schedule CliConfig::schedule(const SpectralModel& m) const {
  const double th = resolved_theta();
  const double bb = resolved_b();
  const double start = t0 ? *t0 : minimal_t0(a, bb, th, m.kappa(), model.r);
  return Schedule::make(a, bb, th, start, model.r, m.kappa());
}

std::string CliConfig::manifest(const SpectralModel& m) const {
  const Schedule s = schedule(m);
  std::ostringstream os;
  os << "# pathsa " << command << '\n'
     << model.to_text() << "seed = " << seed << '\n'
     << "a = " << format_double(s.a) << '\n'
     << "b = " << format_double(s.b) << '\n'
     << "theta = " << format_double(s.theta) << '\n'
     << "t0 = " << format_double(s.t0) << '\n'
     << "T = " << horizon() << '\n'
     << "rep = " << representation_name(rep) << '\n'
     << "replicates = " << replicates << '\n'
     << "delta = " << format_double(delta) << '\n'
     << "fit_t_min = " << format_double(fit_t_min) << '\n'
     << "fit_t_max = " << format_double(fit_t_max) << '\n'
     << "out = " << out << '\n'
     << "dim = " << dim << '\n'
     << "outcomes = " << outcomes << '\n'
     << "trials = " << trials << '\n'
     << "M = " << format_double(M) << '\n'
     << "bound_sigma = " << format_double(bound_sigma) << '\n'
     << "eps = " << join(eps) << '\n'
     << "paths = " << paths << '\n'
     << "coverage_t = " << coverage_t << '\n'
     << "generator = " << generator << '\n'
     << "radius_scale = " << format_double(radius_scale) << '\n'
     << "path_points = " << path_points << '\n'
     << "lambda_min = " << format_double(lambda_min) << '\n'
     << "lambda_max = " << format_double(lambda_max) << '\n'
     << "drift_r = " << join(drift_r) << '\n'
     << "clauses = " << (clauses_explicit ? clauses : "auto") << '\n'
     << "kmax = " << kmax << '\n';
  return os.str();
}

CliConfig parse_config(std::string_view text) {
  CliConfig cfg;
  for (const KeyValue& kv : parse_key_values(text)) cfg.set(kv);
  return cfg;
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("PATHSA_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

}  // namespace pathsa
