#pragma once

#include "rvrbm/analysis.hpp"
#include "rvrbm/batch.hpp"
#include "rvrbm/control_variate.hpp"
#include "rvrbm/ensemble.hpp"
#include "rvrbm/models.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rvrbm {

enum class Method
{
  full,
  rbm,
  rvrbm,
};

Method parse_method(const std::string& name);
std::string to_string(Method method);

/// What the mean error is measured against.
enum class ErrorReference
{
  initial_sample, // empirical mean of the initial ensemble (conserved by the exact dynamics)
  law,            // exact mean of the initial law
};

ErrorReference parse_error_reference(const std::string& name);
std::string to_string(ErrorReference ref);

struct SimConfig
{
  ModelSpec model;
  Method method = Method::full;
  std::optional<CvConfig> cv;
  std::size_t n = 1000;
  std::size_t m = 10;
  double dt = 1e-2;
  double t_end = 1.0;
  std::uint64_t seed = 1;
  std::size_t record_every = 10;
  BatchingMode batching = BatchingMode::partition;
  BatchDivisor divisor = BatchDivisor::batch_size;
  ErrorReference error_reference = ErrorReference::initial_sample;
  std::optional<KdeConfig> kde;
  /// Times at which density snapshots are taken (requires kde).
  std::vector<double> snapshot_times;
};

/// Throws ConfigError naming the offending values.
void validate(const SimConfig& cfg);
std::size_t step_count(const SimConfig& cfg);

struct StepDiagnostics
{
  CvState cv;
  std::size_t projections = 0;
};

/// One Euler-Maruyama step for the configured method. Reference means that
/// are frozen in time are captured from the ensemble given at construction.
class Stepper
{
public:
  Stepper(SimConfig cfg, const Ensemble& initial);

  Ensemble step(const Ensemble& e, std::size_t step_index, StepDiagnostics* diag = nullptr) const;
  /// Control-variate estimate for the state without advancing it.
  CvState estimate(const Ensemble& e, std::size_t step_index) const;

  const SimConfig& config() const { return cfg_; }

private:
  BatchPlan plan_for(std::size_t step_index) const;
  std::vector<double> reference_mean(const Ensemble& e) const;
  std::optional<ClusterState> clusters_for(const Ensemble& e) const;

  SimConfig cfg_;
  std::vector<double> initial_mean_;
  std::vector<std::vector<double>> initial_cluster_means_;
};

/// Single step with frozen references taken from `e` itself.
Ensemble step(const Ensemble& e, const SimConfig& cfg, std::size_t step_index);

struct DensitySnapshot
{
  double t = 0.0;
  DensityGrid density;
};

struct RunOutput
{
  Method method = Method::full;
  std::vector<double> times;
  std::vector<std::vector<double>> mean_v;
  std::vector<double> var_v;
  std::vector<double> error;
  /// rvRBM only: (1/N) sum_i lambda_i at each recorded time, and clamp events.
  std::vector<double> lambda_mean;
  std::vector<std::size_t> clamp_count;
  /// Opinion-domain projections performed since the previous record.
  std::vector<std::size_t> projection_count;
  std::vector<double> reference_mean;
  std::vector<DensitySnapshot> snapshots;
  Ensemble final_state;
  double wall_init = 0.0;
  double wall_steps = 0.0;
  double wall_diagnostics = 0.0;
};

RunOutput run(const SimConfig& cfg);

/// Runs the same configuration with several methods under common random
/// numbers: identical initial ensemble, Wiener increments and batch plans.
std::vector<RunOutput> coupled_run(const SimConfig& base, const std::vector<Method>& methods);
/// Same, for explicitly given configs; throws ConfigError if they disagree
/// on n, dt, t_end, seed or model.
std::vector<RunOutput> coupled_run(const std::vector<SimConfig>& configs);

} // namespace rvrbm
