#pragma once

#include "rvrbm/integrate.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rvrbm {

enum class Preset
{
  test1a, // deterministic bounded confidence, delta = 1, uniform opinions
  test1b, // bounded confidence, delta = 1/2, two isolated clusters
  test2,  // noisy bounded confidence, sigma2 = 0.1, D^2 = 1 - v^2
  test3,  // Cucker-Smale, xi = 1, beta = 0.1
  custom,
};

Preset parse_preset(const std::string& name);
std::string to_string(Preset p);

enum class SweepAxis
{
  n,
  m,
};

struct SweepSpec
{
  SweepAxis axis = SweepAxis::n;
  std::vector<std::size_t> values;
  std::size_t repeats = 20;
};

struct BenchSpec
{
  std::vector<std::size_t> n_values{5000, 10000, 20000};
  std::size_t steps = 20;
  std::size_t full_steps = 2;
  std::size_t repetitions = 3;
};

struct ExperimentConfig
{
  Preset preset = Preset::custom;
  SimConfig sim;
  std::vector<Method> methods;
  std::optional<SweepSpec> sweep;
  BenchSpec bench;
  std::filesystem::path out_dir = "results";
  int threads = 0; // 0 keeps the OpenMP default
  /// Every key with its resolved value, echoed into the manifest.
  std::map<std::string, std::string> resolved;
};

using Assignments = std::vector<std::pair<std::string, std::string>>;

/// Parses `[section]` headers and `key = value` lines ('#' starts a comment).
/// Keys are returned as "section.key".
Assignments parse_config_text(std::string_view text);

/// Resolves base defaults, then the preset's parameters, then `assignments`
/// in order. Throws ConfigError for unknown keys, malformed values, a missing
/// preset/model, or an invalid resulting configuration.
ExperimentConfig resolve_config(const Assignments& assignments);

/// Reads a config file (may be empty path) and applies command-line overrides after it.
ExperimentConfig parse_config(const std::filesystem::path& file, const Assignments& overrides = {});

/// All keys accepted in config files and --set overrides.
std::vector<std::string> known_keys();

/// Parameters a preset sets on top of the base defaults.
Assignments preset_assignments(Preset p);

struct ExperimentResult
{
  std::vector<RunOutput> runs;
  std::vector<std::filesystem::path> files;
};

/// Runs the configured experiment and writes manifest.json, series_<method>.csv,
/// density_<method>_t<time>.csv and, for sweeps, summary.csv into out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct BenchResult
{
  std::vector<std::size_t> n_values;
  std::map<std::string, std::vector<double>> step_seconds; // per method
};

/// Times single steps of full, rbm and rvrbm at each n; writes bench.json.
BenchResult bench(const ExperimentConfig& cfg, bool write_report = true);

/// Per-method step-time ratio between consecutive n values.
std::vector<double> doubling_ratios(const std::vector<double>& seconds);

/// Series CSV (t, mean, variance, error, lambda_mean, clamp_count, projection_count).
std::string series_csv(const RunOutput& run);

void set_thread_count(int threads);

} // namespace rvrbm
