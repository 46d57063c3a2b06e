// Command-line front end: config resolution, persistence of generated data
// and fitted ROMs, CSV and plot-script output.
#pragma once

#include "romx/benchmark.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace romx::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDivergence = 3,
  kIoError = 4,
};

/// Setup-field overrides applied on top of the named setup.
struct SetupOverrides {
  std::optional<int> D;
  std::optional<int> T;
  std::optional<int> N;
  std::optional<double> psnr_db;
  std::optional<double> gamma;
  std::optional<double> rho;
  std::optional<double> nu_min;
  std::optional<double> nu_max;
  std::optional<double> amplitude;
};

struct RunConfig {
  std::string setup_id = "i";
  SetupOverrides overrides;
  BenchmarkOptions options;
  std::filesystem::path out = "romx-out";
  std::optional<std::filesystem::path> data;  // defaults to out
  // fit / evaluate
  std::optional<Strategy> strategy;
  std::optional<RomFamily> rom;
  std::optional<int> k;
  std::optional<std::filesystem::path> fit_dir;
  // prop1-check
  int prop1_instances = 50;

  SetupSpec resolved_setup() const;
  std::filesystem::path data_dir() const { return data.value_or(out); }
};

/// key = value lines, '#' starts a comment. Keys are the long flag names
/// without the leading dashes.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Applies one setting; throws ConfigError on unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Every resolved value, including fixed design constants and the version.
std::string manifest_text(const RunConfig& config, const std::string& command);

/// CSV with header setup,rom,strategy,k,mean_error,seed.
std::string benchmark_csv(const BenchmarkResult& result, std::uint64_t seed);

/// gnuplot script plotting mean_error against k, log error axis.
std::string gnuplot_script(const BenchmarkResult& result, const std::string& csv_name);

/// Runs one subcommand; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace romx::cli
