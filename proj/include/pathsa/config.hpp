#pragma once

// Run configuration shared by every subcommand: built-in defaults, then a
// `key = value` file, then command-line flags.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathsa/online_learner.hpp"
#include "pathsa/schedule.hpp"
#include "pathsa/spectral_model.hpp"
#include "pathsa/text_format.hpp"

namespace pathsa {

struct CliConfig {
  std::string command;
  ModelParams model;
  std::uint64_t seed = 1;

  // Schedule; nullopt means auto: b = 1/a, theta = 2r/(2r+1), t0 = minimal_t0.
  double a = 4.0;
  std::optional<double> b;
  std::optional<double> theta;
  std::optional<double> t0;

  std::optional<std::size_t> T;  // nullopt: per-command default
  Representation rep = Representation::kSpectral;
  std::size_t replicates = 20;
  double delta = 0.1;
  double fit_t_min = 0.0;
  double fit_t_max = 0.0;
  std::string out = "trace.csv";

  // verify-decomp
  std::size_t dim = 5;
  std::size_t outcomes = 3;
  std::size_t trials = 50;

  // bounds
  double M = 1.0;
  double bound_sigma = 1.0;
  std::vector<double> eps{0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};

  // coverage
  std::size_t paths = 10000;
  std::size_t coverage_t = 100;
  std::string generator = "rademacher";
  double radius_scale = 1.0;

  // path
  std::size_t path_points = 40;
  double lambda_min = 1e-6;
  double lambda_max = 1.0;

  // verify-drift
  std::vector<double> drift_r{0.6, 1.0, 1.4};
  std::string clauses = "ABCDE";  // "auto" in text: every clause valid for each r
  bool clauses_explicit = false;  // an invalid clause is then a usage error
  int kmax = 10;

  // Not part of the manifest: they do not change any output bytes.
  unsigned threads = 1;
  std::filesystem::path out_dir = ".";

  /// Applies one key. ConfigError for unknown keys and malformed values.
  void set(const KeyValue& kv);
  void set(const std::string& key, const std::string& value) { set(KeyValue{key, value, 0}); }

  std::size_t horizon() const;  // T or the command's default
  double resolved_theta() const;
  double resolved_b() const;
  /// Schedule with every auto field resolved against the model.
  Schedule schedule(const SpectralModel& model) const;

  /// Fully resolved `key = value` text; feeding it back reproduces the run.
  std::string manifest(const SpectralModel& model) const;
};

/// Defaults overridden by text. ConfigError (with line number) on unknown
/// keys, malformed lines and type mismatches.
CliConfig parse_config(std::string_view text);

/// Output directory default: $PATHSA_OUTPUT_DIR, else ".".
std::filesystem::path default_output_dir();

}  // namespace pathsa
