#pragma once

#include "rvrbm/batch.hpp"
#include "rvrbm/ensemble.hpp"
#include "rvrbm/models.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rvrbm {

enum class LambdaMode
{
  scalar,       // one lambda per step, pooled over all particles (per cluster if clustered)
  per_particle, // lambda_i from particle i's own batch samples
};

enum class ReferenceMeanMode
{
  frozen,     // U_N taken from the initial ensemble
  recomputed, // U_N recomputed every step
};

LambdaMode parse_lambda_mode(const std::string& name);
std::string to_string(LambdaMode mode);
ReferenceMeanMode parse_reference_mean_mode(const std::string& name);
std::string to_string(ReferenceMeanMode mode);

struct CvConfig
{
  SurrogateSpec surrogate;
  LambdaMode lambda_mode = LambdaMode::scalar;
  double variance_floor = 1e-12;
  double clamp_lo = -5.0;
  double clamp_hi = 5.0;
  ReferenceMeanMode reference_mean_mode = ReferenceMeanMode::recomputed;
  /// Skip estimation and use this value for every particle.
  std::optional<double> pinned_lambda;
};

void validate(const CvConfig& cfg);

struct LambdaEstimate
{
  double lambda = 0.0;
  double cov_hat = 0.0;
  double var_hat = 0.0;
  bool floored = false;
  bool clamped = false;
};

/// Centred cross and square sums of paired samples, mergeable across
/// particles and velocity components. cov_hat = cross / dof and
/// var_hat = zz / dof.
struct CvMoments
{
  double cross = 0.0;
  double zz = 0.0;
  double dof = 0.0;

  CvMoments& operator+=(const CvMoments& o)
  {
    cross += o.cross;
    zz += o.zz;
    dof += o.dof;
    return *this;
  }
};

/// Paired samples (y_j, z_j), stored row-major with `dim` components each.
struct CvSamples
{
  std::vector<double> y;
  std::vector<double> z;
  std::size_t dim = 1;

  std::size_t size() const { return dim ? y.size() / dim : 0; }
};

/// Bessel-corrected moments of L paired samples with `dim` components each
/// (components are centred separately and pooled).
CvMoments sample_moments(std::span<const double> y, std::span<const double> z, std::size_t dim = 1);

/// lambda = cov_hat / var_hat, forced to 0 below the variance floor, then clamped.
LambdaEstimate finalize_lambda(const CvMoments& m, const CvConfig& cfg);

/// Sample estimate of the optimal weight Cov(Y, Z) / Var(Z). Throws
/// ConfigError for fewer than 2 samples or mismatched lengths.
LambdaEstimate estimate_lambda(std::span<const double> y, std::span<const double> z,
                               const CvConfig& cfg);

/// Nearest-centre cluster assignment with per-cluster conditional means.
struct ClusterState
{
  std::vector<std::vector<double>> centers;
  std::vector<std::size_t> assignment;
  std::vector<std::vector<double>> means; // U_{N,k}
  std::vector<std::size_t> counts;

  std::size_t num_clusters() const { return centers.size(); }
};

ClusterState assign_clusters(const Ensemble& e, const std::vector<std::vector<double>>& centers);
/// Keep the assignment and centres, recompute the conditional means.
void update_cluster_means(const Ensemble& e, ClusterState& state);

/// Estimator inputs over S(i) \ {i}: y_j = P(x_i, x_j, v_i, v_j)(v_j - v_i),
/// z_j = P~(x_i, v_i)(v_j - u_ref). A batch of size 1 yields empty lists.
CvSamples collect_cv_samples(const Ensemble& e, const KernelSpec& k, const SurrogateSpec& s,
                             const BatchPlan& plan, std::span<const double> u_ref, std::size_t i);

/// Cluster-restricted variant: z_j = P~(x_i, v_i) 1[c(j) = c(i)] (v_j - U_{N,c(i)}).
CvSamples collect_cluster_cv_samples(const Ensemble& e, const KernelSpec& k,
                                     const SurrogateSpec& s, const BatchPlan& plan,
                                     const ClusterState& clusters, std::size_t i);

/// batch_drift(i) - lambda_i P~(x_i, v_i)(U_{M,i} - u_ref).
void cv_drift(const Ensemble& e, const KernelSpec& k, const SurrogateSpec& s, const BatchPlan& plan,
              std::span<const double> u_ref, double lambda_i, std::size_t i, std::span<double> out,
              BatchDivisor divisor = BatchDivisor::batch_size);
std::vector<double> cv_drift(const Ensemble& e, const KernelSpec& k, const SurrogateSpec& s,
                             const BatchPlan& plan, std::span<const double> u_ref, double lambda_i,
                             std::size_t i);

/// batch_drift(i) - lambda_{c(i)} P~(x_i, v_i) (|S_c| / |S|)(U_{M,c} - U_{N,c}),
/// where S_c are the members of S(i) in cluster c(i) and U_{M,c} their mean.
/// The correction is lambda times the batch average of the cluster-restricted
/// control samples; it vanishes when S(i) holds no other member of c(i).
void multi_cluster_cv_drift(const Ensemble& e, const KernelSpec& k, const SurrogateSpec& s,
                            const BatchPlan& plan, const ClusterState& clusters,
                            std::span<const double> lambda_k, std::size_t i, std::span<double> out,
                            BatchDivisor divisor = BatchDivisor::batch_size);
std::vector<double> multi_cluster_cv_drift(const Ensemble& e, const KernelSpec& k,
                                           const SurrogateSpec& s, const BatchPlan& plan,
                                           const ClusterState& clusters,
                                           std::span<const double> lambda_k, std::size_t i);

/// Per-step lambda values and their statistics.
struct CvState
{
  /// Coefficient applied to each particle (size n).
  std::vector<double> lambda;
  /// One entry per estimate: 1 (scalar), K (scalar, clustered) or n (per particle).
  std::vector<double> cov_hat;
  std::vector<double> var_hat;
  std::vector<std::uint8_t> clamped;
  std::size_t clamp_count = 0;
  std::size_t floor_count = 0;

  double lambda_mean() const;
};

/// Row sums of each particle's samples (n x dim_v, row-major), kept so the
/// step can reuse them instead of evaluating the kernel a second time.
struct CvSums
{
  std::vector<double> y;
  std::vector<double> z;
};

/// Estimates the step's lambda values from the batch samples of every
/// particle. `clusters` selects the cluster-restricted estimator. With a
/// pinned lambda nothing is sampled and `sums` is left empty.
CvState estimate_cv_state(const Ensemble& e, const KernelSpec& k, const CvConfig& cfg,
                          const BatchPlan& plan, std::span<const double> u_ref,
                          const ClusterState* clusters = nullptr, CvSums* sums = nullptr);

} // namespace rvrbm
