#pragma once

#include "rvrbm/ensemble.hpp"
#include "rvrbm/models.hpp"
#include "rvrbm/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace rvrbm {

enum class BatchingMode
{
  /// One shuffle per step cut into consecutive blocks of size m; every
  /// particle sits in exactly one batch.
  partition,
  /// Each particle draws its own batch: itself plus m - 1 distinct others.
  per_particle,
};

BatchingMode parse_batching_mode(const std::string& name);
std::string to_string(BatchingMode mode);

/// Random batches S(i) for one time step.
class BatchPlan
{
public:
  /// Single batch holding every particle (the m = n degenerate case).
  static BatchPlan whole(std::size_t n, std::size_t step = 0);
  /// Explicit batches; each particle must belong to exactly one of them.
  static BatchPlan from_batches(const std::vector<std::vector<std::size_t>>& batches,
                                std::size_t step = 0);

  std::size_t step() const { return step_; }
  std::size_t batch_size() const { return m_; }
  std::size_t particles() const { return batch_of_.size(); }
  BatchingMode mode() const { return mode_; }

  std::size_t num_batches() const { return offsets_.size() - 1; }
  std::span<const std::size_t> batch(std::size_t b) const
  {
    return {members_.data() + offsets_[b], offsets_[b + 1] - offsets_[b]};
  }
  /// S(i): the batch particle i interacts with (always contains i).
  std::span<const std::size_t> batch_of(std::size_t i) const { return batch(batch_of_[i]); }
  std::size_t batch_index(std::size_t i) const { return batch_of_[i]; }

private:
  friend BatchPlan make_batches(std::size_t, std::size_t, const RngKey&, BatchingMode);

  std::size_t step_ = 0;
  std::size_t m_ = 0;
  BatchingMode mode_ = BatchingMode::partition;
  std::vector<std::size_t> members_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> batch_of_;
};

/// Draws a plan. Partition mode shuffles with stream `key` (particle field
/// ignored); per-particle mode draws particle i's batch from
/// {key.seed, key.kind, i, key.step}. Requires 1 < m < n.
BatchPlan make_batches(std::size_t n, std::size_t m, const RngKey& key,
                       BatchingMode mode = BatchingMode::partition);

/// Divisor used by the batch average. The default divides by the actual batch
/// size (self term included, contributing zero).
enum class BatchDivisor
{
  batch_size,
  batch_size_minus_one,
};

/// (1/N) sum_j P(x_i, x_j, v_i, v_j)(v_j - v_i), written into out (dim_v).
void full_drift(const Ensemble& e, const KernelSpec& k, std::size_t i, std::span<double> out);
std::vector<double> full_drift(const Ensemble& e, const KernelSpec& k, std::size_t i);

/// (1/|S(i)|) sum_{j in S(i)} P(x_i, x_j, v_i, v_j)(v_j - v_i).
void batch_drift(const Ensemble& e, const KernelSpec& k, const BatchPlan& plan, std::size_t i,
                 std::span<double> out, BatchDivisor divisor = BatchDivisor::batch_size);
std::vector<double> batch_drift(const Ensemble& e, const KernelSpec& k, const BatchPlan& plan,
                                std::size_t i, BatchDivisor divisor = BatchDivisor::batch_size);

/// Mean velocity U_{M,i} over S(i).
void batch_mean_velocity(const Ensemble& e, const BatchPlan& plan, std::size_t i,
                         std::span<double> out);
std::vector<double> batch_mean_velocity(const Ensemble& e, const BatchPlan& plan, std::size_t i);

} // namespace rvrbm
