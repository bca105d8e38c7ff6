#include "rvrbm/control_variate.hpp"

#include "rvrbm/detail/drift.hpp"
#include "rvrbm/error.hpp"

#include <algorithm>
#include <limits>

namespace rvrbm {

LambdaMode parse_lambda_mode(const std::string& name)
{
  if (name == "scalar")
    return LambdaMode::scalar;
  if (name == "per_particle")
    return LambdaMode::per_particle;
  throw ConfigError("unknown lambda mode '" + name + "' (expected scalar, per_particle)");
}

std::string to_string(LambdaMode mode)
{
  return mode == LambdaMode::scalar ? "scalar" : "per_particle";
}

ReferenceMeanMode parse_reference_mean_mode(const std::string& name)
{
  if (name == "frozen")
    return ReferenceMeanMode::frozen;
  if (name == "recomputed")
    return ReferenceMeanMode::recomputed;
  throw ConfigError("unknown reference mean mode '" + name + "' (expected frozen, recomputed)");
}

std::string to_string(ReferenceMeanMode mode)
{
  return mode == ReferenceMeanMode::frozen ? "frozen" : "recomputed";
}

void validate(const CvConfig& cfg)
{
  validate(cfg.surrogate);
  if (!(cfg.variance_floor > 0.0))
    throw ConfigError("variance_floor must be > 0");
  if (!(cfg.clamp_lo <= 0.0 && cfg.clamp_hi >= 0.0))
    throw ConfigError("lambda clamp interval must contain 0");
  if (cfg.pinned_lambda && !std::isfinite(*cfg.pinned_lambda))
    throw ConfigError("pinned lambda must be finite");
}

CvMoments sample_moments(std::span<const double> y, std::span<const double> z, std::size_t dim)
{
  CvMoments m;
  const std::size_t count = y.size() / dim;
  if (count < 2)
    return m;
  for (std::size_t c = 0; c < dim; ++c) {
    double my = 0.0, mz = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      my += y[j * dim + c];
      mz += z[j * dim + c];
    }
    my /= static_cast<double>(count);
    mz /= static_cast<double>(count);
    for (std::size_t j = 0; j < count; ++j) {
      const double dz = z[j * dim + c] - mz;
      m.cross += (y[j * dim + c] - my) * dz;
      m.zz += dz * dz;
    }
  }
  m.dof = static_cast<double>(count - 1);
  return m;
}

LambdaEstimate finalize_lambda(const CvMoments& m, const CvConfig& cfg)
{
  LambdaEstimate est;
  if (m.dof <= 0.0) {
    est.floored = true;
    return est;
  }
  est.cov_hat = m.cross / m.dof;
  est.var_hat = m.zz / m.dof;
  if (!(est.var_hat >= cfg.variance_floor)) {
    est.floored = true;
    return est;
  }
  const double raw = est.cov_hat / est.var_hat;
  est.lambda = std::clamp(raw, cfg.clamp_lo, cfg.clamp_hi);
  est.clamped = est.lambda != raw;
  return est;
}

LambdaEstimate estimate_lambda(std::span<const double> y, std::span<const double> z,
                               const CvConfig& cfg)
{
  if (y.size() != z.size())
    throw ConfigError("estimate_lambda: sample lengths differ");
  if (y.size() < 2)
    throw ConfigError("estimate_lambda: need at least 2 samples");
  return finalize_lambda(sample_moments(y, z), cfg);
}

ClusterState assign_clusters(const Ensemble& e, const std::vector<std::vector<double>>& centers)
{
  if (centers.empty())
    throw ConfigError("assign_clusters: no cluster centres");
  for (const auto& c : centers)
    if (c.size() != e.dim_v())
      throw ConfigError("assign_clusters: centre dimension differs from velocity dimension");
  ClusterState state;
  state.centers = centers;
  state.assignment.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto v = e.velocity(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.size(); ++k) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < v.size(); ++c)
        d2 += (v[c] - centers[k][c]) * (v[c] - centers[k][c]);
      if (d2 < best) {
        best = d2;
        state.assignment[i] = k;
      }
    }
  }
  update_cluster_means(e, state);
  return state;
}

void update_cluster_means(const Ensemble& e, ClusterState& state)
{
  const std::size_t K = state.centers.size();
  state.means.assign(K, std::vector<double>(e.dim_v(), 0.0));
  state.counts.assign(K, 0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const std::size_t k = state.assignment[i];
    ++state.counts[k];
    const auto v = e.velocity(i);
    for (std::size_t c = 0; c < v.size(); ++c)
      state.means[k][c] += v[c];
  }
  for (std::size_t k = 0; k < K; ++k)
    for (double& c : state.means[k])
      c = state.counts[k] ? c / static_cast<double>(state.counts[k]) : 0.0;
}

namespace {

// Which reference the control samples are centred on.
struct ControlTarget
{
  std::span<const double> u_ref;
  const ClusterState* clusters = nullptr;

  // Reference for sample j as seen from particle i; empty span means the
  // sample does not enter the control variate (z_j = 0).
  std::span<const double> reference(std::size_t i, std::size_t j) const
  {
    if (!clusters)
      return u_ref;
    const std::size_t ci = clusters->assignment[i];
    if (clusters->assignment[j] != ci)
      return {};
    return clusters->means[ci];
  }
};

template <class Kernel>
void fill_samples(const Ensemble& e, const Kernel& kernel, const SurrogateSpec& s,
                  const BatchPlan& plan, const ControlTarget& target, std::size_t i,
                  std::vector<double>& y, std::vector<double>& z)
{
  const std::size_t dv = e.dim_v();
  const auto members = plan.batch_of(i);
  y.clear();
  z.clear();
  const auto xi = e.position(i);
  const auto vi = e.velocity(i);
  const double ptilde = eval_surrogate(s, xi, vi);
  for (std::size_t j : members) {
    if (j == i)
      continue;
    const auto vj = e.velocity(j);
    const double w = kernel(xi, e.position(j), vi, vj);
    const auto ref = target.reference(i, j);
    for (std::size_t c = 0; c < dv; ++c) {
      y.push_back(w * (vj[c] - vi[c]));
      z.push_back(ref.empty() ? 0.0 : ptilde * (vj[c] - ref[c]));
    }
  }
}

CvSamples collect(const Ensemble& e, const KernelSpec& k, const SurrogateSpec& s,
                  const BatchPlan& plan, const ControlTarget& target, std::size_t i)
{
  CvSamples out;
  out.dim = e.dim_v();
  detail::with_kernel(k, [&](const auto& kernel) {
    fill_samples(e, kernel, s, plan, target, i, out.y, out.z);
  });
  return out;
}

// Adds -lambda * P~(x_i, v_i) * (1/|S|) sum_{j in S} z_j / P~ to out.
void add_correction(const Ensemble& e, const SurrogateSpec& s, const BatchPlan& plan,
                    const ControlTarget& target, double lambda, std::size_t i,
                    std::span<double> out)
{
  if (lambda == 0.0)
    return;
  const auto members = plan.batch_of(i);
  const std::size_t dv = e.dim_v();
  const double ptilde = eval_surrogate(s, e.position(i), e.velocity(i));
  const double scale = lambda * ptilde / static_cast<double>(members.size());
  for (std::size_t j : members) {
    const auto ref = target.reference(i, j);
    if (ref.empty())
      continue;
    const auto vj = e.velocity(j);
    for (std::size_t c = 0; c < dv; ++c)
      out[c] -= scale * (vj[c] - ref[c]);
  }
}

void check_reference(const Ensemble& e, std::span<const double> u_ref)
{
  if (u_ref.size() != e.dim_v())
    throw ConfigError("reference mean dimension differs from velocity dimension");
}

} // namespace

CvSamples collect_cv_samples(const Ensemble& e, const KernelSpec& k, const SurrogateSpec& s,
                             const BatchPlan& plan, std::span<const double> u_ref, std::size_t i)
{
  check_reference(e, u_ref);
  return collect(e, k, s, plan, ControlTarget{u_ref, nullptr}, i);
}

CvSamples collect_cluster_cv_samples(const Ensemble& e, const KernelSpec& k,
                                     const SurrogateSpec& s, const BatchPlan& plan,
                                     const ClusterState& clusters, std::size_t i)
{
  return collect(e, k, s, plan, ControlTarget{{}, &clusters}, i);
}

void cv_drift(const Ensemble& e, const KernelSpec& k, const SurrogateSpec& s, const BatchPlan& plan,
              std::span<const double> u_ref, double lambda_i, std::size_t i, std::span<double> out,
              BatchDivisor divisor)
{
  check_reference(e, u_ref);
  batch_drift(e, k, plan, i, out, divisor);
  add_correction(e, s, plan, ControlTarget{u_ref, nullptr}, lambda_i, i, out);
}

std::vector<double> cv_drift(const Ensemble& e, const KernelSpec& k, const SurrogateSpec& s,
                             const BatchPlan& plan, std::span<const double> u_ref, double lambda_i,
                             std::size_t i)
{
  std::vector<double> out(e.dim_v());
  cv_drift(e, k, s, plan, u_ref, lambda_i, i, out);
  return out;
}

void multi_cluster_cv_drift(const Ensemble& e, const KernelSpec& k, const SurrogateSpec& s,
                            const BatchPlan& plan, const ClusterState& clusters,
                            std::span<const double> lambda_k, std::size_t i, std::span<double> out,
                            BatchDivisor divisor)
{
  if (lambda_k.size() != clusters.num_clusters())
    throw ConfigError("multi_cluster_cv_drift: one lambda per cluster required");
  batch_drift(e, k, plan, i, out, divisor);
  add_correction(e, s, plan, ControlTarget{{}, &clusters}, lambda_k[clusters.assignment[i]], i,
                 out);
}

std::vector<double> multi_cluster_cv_drift(const Ensemble& e, const KernelSpec& k,
                                           const SurrogateSpec& s, const BatchPlan& plan,
                                           const ClusterState& clusters,
                                           std::span<const double> lambda_k, std::size_t i)
{
  std::vector<double> out(e.dim_v());
  multi_cluster_cv_drift(e, k, s, plan, clusters, lambda_k, i, out);
  return out;
}

double CvState::lambda_mean() const
{
  if (lambda.empty())
    return 0.0;
  double sum = 0.0;
  for (double l : lambda)
    sum += l;
  return sum / static_cast<double>(lambda.size());
}

CvState estimate_cv_state(const Ensemble& e, const KernelSpec& k, const CvConfig& cfg,
                          const BatchPlan& plan, std::span<const double> u_ref,
                          const ClusterState* clusters, CvSums* sums)
{
  const std::size_t n = e.size();
  const std::size_t dv = e.dim_v();
  CvState state;
  if (cfg.pinned_lambda) {
    state.lambda.assign(n, *cfg.pinned_lambda);
    return state;
  }
  if (!clusters)
    check_reference(e, u_ref);
  const ControlTarget target{u_ref, clusters};

  std::vector<CvMoments> moments(n);
  if (sums) {
    sums->y.assign(n * dv, 0.0);
    sums->z.assign(n * dv, 0.0);
  }
  detail::with_kernel(k, [&](const auto& kernel) {
#pragma omp parallel
    {
      std::vector<double> y, z;
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        fill_samples(e, kernel, cfg.surrogate, plan, target, i, y, z);
        moments[i] = sample_moments(y, z, dv);
        if (sums)
          for (std::size_t s = 0; s < y.size(); ++s) {
            sums->y[i * dv + s % dv] += y[s];
            sums->z[i * dv + s % dv] += z[s];
          }
      }
    }
  });

  auto record = [&](const LambdaEstimate& est) {
    state.cov_hat.push_back(est.cov_hat);
    state.var_hat.push_back(est.var_hat);
    state.clamped.push_back(est.clamped ? 1 : 0);
    state.clamp_count += est.clamped ? 1 : 0;
    state.floor_count += est.floored ? 1 : 0;
  };

  state.lambda.resize(n);
  if (cfg.lambda_mode == LambdaMode::per_particle) {
    for (std::size_t i = 0; i < n; ++i) {
      const LambdaEstimate est = finalize_lambda(moments[i], cfg);
      state.lambda[i] = est.lambda;
      record(est);
    }
    return state;
  }

  // Scalar mode: pool within-batch moments (per cluster when clustered),
  // summed in index order so the result is independent of the thread count.
  const std::size_t groups = clusters ? clusters->num_clusters() : 1;
  std::vector<CvMoments> pooled(groups);
  for (std::size_t i = 0; i < n; ++i)
    pooled[clusters ? clusters->assignment[i] : 0] += moments[i];
  std::vector<double> group_lambda(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const LambdaEstimate est = finalize_lambda(pooled[g], cfg);
    group_lambda[g] = est.lambda;
    record(est);
  }
  for (std::size_t i = 0; i < n; ++i)
    state.lambda[i] = group_lambda[clusters ? clusters->assignment[i] : 0];
  return state;
}

} // namespace rvrbm
