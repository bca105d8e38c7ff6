#pragma once

#include "rvrbm/models.hpp"
#include "rvrbm/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rvrbm {

/// Positions and velocities of n particles, stored row-major
/// (x is n x dim_x, v is n x dim_v). dim_x is 0 for space-homogeneous
/// opinion models.
class Ensemble
{
public:
  Ensemble() = default;
  Ensemble(std::size_t n, std::size_t dim_x, std::size_t dim_v, bool opinion_domain = false);
  Ensemble(std::vector<double> x, std::vector<double> v, std::size_t dim_x, std::size_t dim_v,
           bool opinion_domain = false);

  /// Opinion ensemble from scalar velocities.
  static Ensemble opinions(std::vector<double> v);

  std::size_t size() const { return n_; }
  std::size_t dim_x() const { return dim_x_; }
  std::size_t dim_v() const { return dim_v_; }
  bool opinion_domain() const { return opinion_domain_; }

  std::span<const double> position(std::size_t i) const { return {x_.data() + i * dim_x_, dim_x_}; }
  std::span<double> position(std::size_t i) { return {x_.data() + i * dim_x_, dim_x_}; }
  std::span<const double> velocity(std::size_t i) const { return {v_.data() + i * dim_v_, dim_v_}; }
  std::span<double> velocity(std::size_t i) { return {v_.data() + i * dim_v_, dim_v_}; }

  const std::vector<double>& positions() const { return x_; }
  const std::vector<double>& velocities() const { return v_; }
  std::vector<double>& positions() { return x_; }
  std::vector<double>& velocities() { return v_; }

  /// Ensemble mean velocity U_N.
  std::vector<double> mean_velocity() const;

  /// Index of the first non-finite entry, or size() if all are finite.
  std::size_t first_non_finite() const;
  /// Throws SimulationError when the invariants (finite entries, opinion bounds) fail.
  void check_invariants(long step = -1) const;

  friend bool operator==(const Ensemble&, const Ensemble&) = default;

private:
  std::size_t n_ = 0;
  std::size_t dim_x_ = 0;
  std::size_t dim_v_ = 1;
  bool opinion_domain_ = false;
  std::vector<double> x_;
  std::vector<double> v_;
};

/// n i.i.d. samples of the model's initial law. Particle i draws from the
/// stream RngKey{seed, init, i, 0}, so the ensemble is a pure function of
/// (seed, n, law).
Ensemble init_ensemble(const ModelSpec& model, std::size_t n, std::uint64_t seed);

} // namespace rvrbm
