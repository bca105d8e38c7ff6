#include "rvrbm/batch.hpp"

#include "rvrbm/detail/drift.hpp"
#include "rvrbm/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace rvrbm {

BatchingMode parse_batching_mode(const std::string& name)
{
  if (name == "partition")
    return BatchingMode::partition;
  if (name == "per_particle")
    return BatchingMode::per_particle;
  throw ConfigError("unknown batching mode '" + name + "' (expected partition, per_particle)");
}

std::string to_string(BatchingMode mode)
{
  return mode == BatchingMode::partition ? "partition" : "per_particle";
}

BatchPlan BatchPlan::whole(std::size_t n, std::size_t step)
{
  BatchPlan plan;
  plan.step_ = step;
  plan.m_ = n;
  plan.members_.resize(n);
  std::iota(plan.members_.begin(), plan.members_.end(), std::size_t{0});
  plan.offsets_ = {0, n};
  plan.batch_of_.assign(n, 0);
  return plan;
}

BatchPlan BatchPlan::from_batches(const std::vector<std::vector<std::size_t>>& batches,
                                  std::size_t step)
{
  BatchPlan plan;
  plan.step_ = step;
  std::size_t n = 0;
  for (const auto& b : batches)
    n += b.size();
  plan.batch_of_.assign(n, n);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    if (batches[b].empty())
      throw ConfigError("BatchPlan: empty batch");
    plan.m_ = std::max(plan.m_, batches[b].size());
    for (std::size_t j : batches[b]) {
      if (j >= n || plan.batch_of_[j] != n)
        throw ConfigError("BatchPlan: batches must partition 0..n-1");
      plan.batch_of_[j] = b;
      plan.members_.push_back(j);
    }
    plan.offsets_.push_back(plan.members_.size());
  }
  return plan;
}

BatchPlan make_batches(std::size_t n, std::size_t m, const RngKey& key, BatchingMode mode)
{
  if (m <= 1 || m >= n)
    throw ConfigError("make_batches: need 1 < m < n (got m=" + std::to_string(m) +
                      ", n=" + std::to_string(n) + ")");
  BatchPlan plan;
  plan.step_ = key.step;
  plan.m_ = m;
  plan.mode_ = mode;

  if (mode == BatchingMode::partition) {
    plan.members_.resize(n);
    std::iota(plan.members_.begin(), plan.members_.end(), std::size_t{0});
    CounterStream stream(RngKey{key.seed, key.kind, 0, key.step});
    for (std::size_t a = n - 1; a > 0; --a)
      std::swap(plan.members_[a], plan.members_[stream.below(a + 1)]);
    plan.offsets_.clear();
    for (std::size_t start = 0; start < n; start += m)
      plan.offsets_.push_back(start);
    plan.offsets_.push_back(n);
    plan.batch_of_.resize(n);
    for (std::size_t b = 0; b + 1 < plan.offsets_.size(); ++b)
      for (std::size_t s = plan.offsets_[b]; s < plan.offsets_[b + 1]; ++s)
        plan.batch_of_[plan.members_[s]] = b;
    return plan;
  }

  plan.members_.resize(n * m);
  plan.offsets_.resize(n + 1);
  plan.batch_of_.resize(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    CounterStream stream(RngKey{key.seed, key.kind, i, key.step});
    std::size_t* out = plan.members_.data() + i * m;
    out[0] = i;
    std::size_t filled = 1;
    while (filled < m) {
      std::size_t j = stream.below(n - 1);
      if (j >= i)
        ++j;
      if (std::find(out, out + filled, j) == out + filled)
        out[filled++] = j;
    }
    plan.offsets_[i] = i * m;
    plan.batch_of_[i] = i;
  }
  plan.offsets_[n] = n * m;
  return plan;
}

void full_drift(const Ensemble& e, const KernelSpec& k, std::size_t i, std::span<double> out)
{
  std::fill(out.begin(), out.end(), 0.0);
  detail::with_kernel(k, [&](const auto& kernel) {
    detail::add_interactions(e, kernel, i, detail::Iota{e.size()}, out);
  });
  const double inv = 1.0 / static_cast<double>(e.size());
  for (double& c : out)
    c *= inv;
}

std::vector<double> full_drift(const Ensemble& e, const KernelSpec& k, std::size_t i)
{
  std::vector<double> out(e.dim_v());
  full_drift(e, k, i, out);
  return out;
}

void batch_drift(const Ensemble& e, const KernelSpec& k, const BatchPlan& plan, std::size_t i,
                 std::span<double> out, BatchDivisor divisor)
{
  std::fill(out.begin(), out.end(), 0.0);
  const auto members = plan.batch_of(i);
  if (members.size() <= 1)
    return;
  detail::with_kernel(k, [&](const auto& kernel) {
    detail::add_interactions(e, kernel, i, members, out);
  });
  const double size = static_cast<double>(members.size());
  const double inv = 1.0 / (divisor == BatchDivisor::batch_size ? size : size - 1.0);
  for (double& c : out)
    c *= inv;
}

std::vector<double> batch_drift(const Ensemble& e, const KernelSpec& k, const BatchPlan& plan,
                                std::size_t i, BatchDivisor divisor)
{
  std::vector<double> out(e.dim_v());
  batch_drift(e, k, plan, i, out, divisor);
  return out;
}

void batch_mean_velocity(const Ensemble& e, const BatchPlan& plan, std::size_t i,
                         std::span<double> out)
{
  std::fill(out.begin(), out.end(), 0.0);
  const auto members = plan.batch_of(i);
  for (std::size_t j : members) {
    const auto vj = e.velocity(j);
    for (std::size_t c = 0; c < out.size(); ++c)
      out[c] += vj[c];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (double& c : out)
    c *= inv;
}

std::vector<double> batch_mean_velocity(const Ensemble& e, const BatchPlan& plan, std::size_t i)
{
  std::vector<double> out(e.dim_v());
  batch_mean_velocity(e, plan, i, out);
  return out;
}

} // namespace rvrbm
