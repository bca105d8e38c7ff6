#include "rvrbm/integrate.hpp"

#include "rvrbm/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace rvrbm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void validate_impl(const SimConfig& cfg, bool allow_whole_batch)
{
  validate(cfg.model);
  if (cfg.n < 1)
    throw ConfigError("n must be >= 1");
  if (!(cfg.dt > 0.0))
    throw ConfigError("dt must be > 0 (got " + std::to_string(cfg.dt) + ")");
  if (!(cfg.t_end >= 0.0))
    throw ConfigError("t_end must be >= 0 (got " + std::to_string(cfg.t_end) + ")");
  if (cfg.record_every < 1)
    throw ConfigError("record_every must be >= 1");
  if (cfg.method != Method::full) {
    const bool too_big = allow_whole_batch ? cfg.m > cfg.n : cfg.m >= cfg.n;
    if (cfg.m <= 1 || too_big)
      throw ConfigError("batch size must satisfy 1 < m < n (got m=" + std::to_string(cfg.m) +
                        ", n=" + std::to_string(cfg.n) + ")");
  }
  if (cfg.method == Method::rvrbm) {
    if (!cfg.cv)
      throw ConfigError("method rvrbm requires a control-variate configuration");
    validate(*cfg.cv);
    for (const auto& c : cfg.cv->surrogate.clusters)
      if (c.size() != cfg.model.dim_v)
        throw ConfigError("cluster centre dimension differs from velocity dimension");
  }
  if (cfg.kde)
    validate(*cfg.kde);
  for (double t : cfg.snapshot_times) {
    if (!cfg.kde)
      throw ConfigError("density snapshots require a KDE configuration");
    if (t < 0.0 || t > cfg.t_end + 1e-12)
      throw ConfigError("snapshot time " + std::to_string(t) + " outside [0, t_end]");
  }
}

} // namespace

Method parse_method(const std::string& name)
{
  if (name == "full")
    return Method::full;
  if (name == "rbm")
    return Method::rbm;
  if (name == "rvrbm")
    return Method::rvrbm;
  throw ConfigError("unknown method '" + name + "' (expected full, rbm, rvrbm)");
}

std::string to_string(Method method)
{
  switch (method) {
  case Method::full:
    return "full";
  case Method::rbm:
    return "rbm";
  case Method::rvrbm:
    return "rvrbm";
  }
  return "?";
}

ErrorReference parse_error_reference(const std::string& name)
{
  if (name == "initial_sample")
    return ErrorReference::initial_sample;
  if (name == "law")
    return ErrorReference::law;
  throw ConfigError("unknown error reference '" + name + "' (expected initial_sample, law)");
}

std::string to_string(ErrorReference ref)
{
  return ref == ErrorReference::law ? "law" : "initial_sample";
}

void validate(const SimConfig& cfg)
{
  validate_impl(cfg, false);
}

std::size_t step_count(const SimConfig& cfg)
{
  return static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
}

Stepper::Stepper(SimConfig cfg, const Ensemble& initial) : cfg_(std::move(cfg))
{
  validate_impl(cfg_, true);
  if (initial.size() != cfg_.n || initial.dim_v() != cfg_.model.dim_v ||
      initial.dim_x() != cfg_.model.dim_x)
    throw ConfigError("Stepper: ensemble shape does not match the configuration");
  initial_mean_ = initial.mean_velocity();
  if (cfg_.method == Method::rvrbm && !cfg_.cv->surrogate.clusters.empty())
    initial_cluster_means_ = assign_clusters(initial, cfg_.cv->surrogate.clusters).means;
}

BatchPlan Stepper::plan_for(std::size_t step_index) const
{
  if (cfg_.m >= cfg_.n)
    return BatchPlan::whole(cfg_.n, step_index);
  return make_batches(cfg_.n, cfg_.m, RngKey{cfg_.seed, StreamKind::batch_shuffle, 0, step_index},
                      cfg_.batching);
}

std::vector<double> Stepper::reference_mean(const Ensemble& e) const
{
  if (cfg_.cv && cfg_.cv->reference_mean_mode == ReferenceMeanMode::frozen)
    return initial_mean_;
  return e.mean_velocity();
}

std::optional<ClusterState> Stepper::clusters_for(const Ensemble& e) const
{
  if (cfg_.method != Method::rvrbm || cfg_.cv->surrogate.clusters.empty())
    return std::nullopt;
  ClusterState state = assign_clusters(e, cfg_.cv->surrogate.clusters);
  if (cfg_.cv->reference_mean_mode == ReferenceMeanMode::frozen)
    state.means = initial_cluster_means_;
  return state;
}

CvState Stepper::estimate(const Ensemble& e, std::size_t step_index) const
{
  if (cfg_.method != Method::rvrbm)
    return {};
  const BatchPlan plan = plan_for(step_index);
  const auto u_ref = reference_mean(e);
  const auto clusters = clusters_for(e);
  return estimate_cv_state(e, cfg_.model.kernel, *cfg_.cv, plan, u_ref,
                           clusters ? &*clusters : nullptr);
}

Ensemble Stepper::step(const Ensemble& e, std::size_t step_index, StepDiagnostics* diag) const
{
  const std::size_t n = e.size();
  const std::size_t dv = e.dim_v();
  const double dt = cfg_.dt;
  const KernelSpec& kernel = cfg_.model.kernel;
  const bool noisy = has_noise(cfg_.model.diffusion);

  std::optional<BatchPlan> plan;
  if (cfg_.method != Method::full)
    plan = plan_for(step_index);

  std::vector<double> u_ref;
  std::optional<ClusterState> clusters;
  CvState cv;
  CvSums sums;
  if (cfg_.method == Method::rvrbm) {
    u_ref = reference_mean(e);
    clusters = clusters_for(e);
    cv = estimate_cv_state(e, kernel, *cfg_.cv, *plan, u_ref, clusters ? &*clusters : nullptr,
                           &sums);
  }
  const bool reuse_sums = !sums.y.empty();
  // cv.lambda holds each particle's coefficient; the clustered drift reads it
  // from the slot of the particle's cluster.
  const std::size_t K = clusters ? clusters->num_clusters() : 0;

  Ensemble next = e;
  std::size_t projections = 0;

#pragma omp parallel
  {
    std::vector<double> drift(dv), dw(dv), lambda_k(K);
#pragma omp for schedule(static) reduction(+ : projections)
    for (std::size_t i = 0; i < n; ++i) {
      switch (cfg_.method) {
      case Method::full:
        full_drift(e, kernel, i, drift);
        break;
      case Method::rbm:
        batch_drift(e, kernel, *plan, i, drift, cfg_.divisor);
        break;
      case Method::rvrbm:
        if (reuse_sums) {
          // Same value as cv_drift, assembled from the estimator's sums:
          // the batch mean of the control samples also holds i's own term.
          const double size = static_cast<double>(plan->batch_of(i).size());
          const double div = cfg_.divisor == BatchDivisor::batch_size ? size : size - 1.0;
          const auto vi = e.velocity(i);
          const auto ref = clusters ? std::span<const double>(clusters->means[clusters->assignment[i]])
                                    : std::span<const double>(u_ref);
          const double ptilde = eval_surrogate(cfg_.cv->surrogate, e.position(i), vi);
          const double scale = cv.lambda[i] / size;
          for (std::size_t c = 0; c < dv; ++c) {
            const double y = size > 1.0 ? sums.y[i * dv + c] / div : 0.0;
            drift[c] = y - scale * (sums.z[i * dv + c] + ptilde * (vi[c] - ref[c]));
          }
        } else if (clusters) {
          std::fill(lambda_k.begin(), lambda_k.end(), 0.0);
          lambda_k[clusters->assignment[i]] = cv.lambda[i];
          multi_cluster_cv_drift(e, kernel, cfg_.cv->surrogate, *plan, *clusters, lambda_k, i,
                                 drift, cfg_.divisor);
        } else {
          cv_drift(e, kernel, cfg_.cv->surrogate, *plan, u_ref, cv.lambda[i], i, drift,
                   cfg_.divisor);
        }
        break;
      }

      const auto v_old = e.velocity(i);
      auto x_new = next.position(i);
      for (std::size_t c = 0; c < x_new.size(); ++c)
        x_new[c] += v_old[c] * dt;

      auto v_new = next.velocity(i);
      double coeff = 0.0;
      if (noisy) {
        wiener_increment(RngKey{cfg_.seed, StreamKind::wiener, i, step_index}, dt, dw);
        coeff = eval_diffusion_coefficient(cfg_.model.diffusion, v_old);
      }
      for (std::size_t c = 0; c < dv; ++c) {
        v_new[c] = v_old[c] + drift[c] * dt + (noisy ? coeff * dw[c] : 0.0);
        if (e.opinion_domain() && (v_new[c] < -1.0 || v_new[c] > 1.0)) {
          v_new[c] = std::clamp(v_new[c], -1.0, 1.0);
          ++projections;
        }
      }
    }
  }

  if (diag) {
    diag->cv = std::move(cv);
    diag->projections = projections;
  }
  return next;
}

Ensemble step(const Ensemble& e, const SimConfig& cfg, std::size_t step_index)
{
  return Stepper(cfg, e).step(e, step_index);
}

RunOutput run(const SimConfig& cfg)
{
  validate(cfg);
  RunOutput out;
  out.method = cfg.method;

  auto t0 = Clock::now();
  Ensemble e = init_ensemble(cfg.model, cfg.n, cfg.seed);
  const Stepper stepper(cfg, e);
  out.reference_mean = cfg.error_reference == ErrorReference::law
                         ? law_mean(cfg.model.initial_law, cfg.model.dim_v)
                         : e.mean_velocity();
  out.wall_init = seconds_since(t0);

  const std::size_t steps = step_count(cfg);
  std::vector<std::size_t> snapshot_steps;
  for (double t : cfg.snapshot_times)
    snapshot_steps.push_back(
      std::min(steps, static_cast<std::size_t>(std::llround(t / cfg.dt))));

  std::size_t pending_projections = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const bool record = k % cfg.record_every == 0 || k == steps;
    StepDiagnostics diag;
    Ensemble next;
    if (k < steps) {
      t0 = Clock::now();
      next = stepper.step(e, k, &diag);
      out.wall_steps += seconds_since(t0);
    } else if (record && cfg.method == Method::rvrbm) {
      diag.cv = stepper.estimate(e, k);
    }

    t0 = Clock::now();
    if (record) {
      e.check_invariants(static_cast<long>(k));
      const Moments mom = moments(e);
      out.times.push_back(static_cast<double>(k) * cfg.dt);
      out.mean_v.push_back(mom.mean);
      out.var_v.push_back(mom.temperature);
      out.error.push_back(mean_error(e, out.reference_mean));
      if (cfg.method == Method::rvrbm) {
        out.lambda_mean.push_back(diag.cv.lambda_mean());
        out.clamp_count.push_back(diag.cv.clamp_count);
      }
      out.projection_count.push_back(pending_projections);
      pending_projections = 0;
    }
    for (std::size_t s = 0; s < snapshot_steps.size(); ++s)
      if (snapshot_steps[s] == k)
        out.snapshots.push_back({cfg.snapshot_times[s], kde(e, *cfg.kde)});
    out.wall_diagnostics += seconds_since(t0);

    if (k < steps) {
      pending_projections += diag.projections;
      e = std::move(next);
    }
  }
  out.final_state = std::move(e);
  return out;
}

std::vector<RunOutput> coupled_run(const SimConfig& base, const std::vector<Method>& methods)
{
  std::vector<SimConfig> configs;
  for (Method m : methods) {
    SimConfig cfg = base;
    cfg.method = m;
    configs.push_back(std::move(cfg));
  }
  return coupled_run(configs);
}

std::vector<RunOutput> coupled_run(const std::vector<SimConfig>& configs)
{
  if (configs.empty())
    throw ConfigError("coupled_run: no methods given");
  const SimConfig& ref = configs.front();
  for (const SimConfig& c : configs) {
    if (c.n != ref.n || c.dt != ref.dt || c.t_end != ref.t_end || c.seed != ref.seed)
      throw ConfigError("coupled_run: methods must share n, dt, t_end and seed");
    if (c.model.initial_law != ref.model.initial_law || c.model.dim_x != ref.model.dim_x ||
        c.model.dim_v != ref.model.dim_v || c.model.kernel.index() != ref.model.kernel.index() ||
        c.model.diffusion.index() != ref.model.diffusion.index())
      throw ConfigError("coupled_run: methods must share the model");
  }
  std::vector<RunOutput> out;
  out.reserve(configs.size());
  for (const SimConfig& c : configs)
    out.push_back(run(c));
  return out;
}

} // namespace rvrbm
