#pragma once

#include "rvrbm/ensemble.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace rvrbm {

/// Gaussian kernel density estimate on a fixed grid. With an empty x axis the
/// estimate is over velocity only (1-D); otherwise over phase space (x, v)
/// for ensembles with dim_x = dim_v = 1.
struct KdeConfig
{
  double sigma2_kernel = 1e-5;
  std::vector<double> grid_v;
  std::vector<double> grid_x;
  /// Build a phase-space grid from the data at evaluation time
  /// (see default_phase_kde); grid_v and grid_x are then ignored.
  bool auto_phase_grid = false;
  std::size_t auto_points = 100;
};

void validate(const KdeConfig& cfg);

/// n uniform points on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);
/// Default opinion grid: 400 points on [-1.1, 1.1].
KdeConfig default_opinion_kde(double sigma2_kernel = 1e-5);
/// 100 x 100 phase-space grid over the data bounding box padded by 6 sqrt(sigma2).
KdeConfig default_phase_kde(const Ensemble& e, double sigma2_kernel = 1e-5,
                            std::size_t points = 100);

/// Density values on a tensor grid; values are row-major with the x axis
/// outermost (values[ix * nv + iv]).
struct DensityGrid
{
  std::vector<double> grid_x;
  std::vector<double> grid_v;
  std::vector<double> values;

  bool is_2d() const { return !grid_x.empty(); }
  /// Trapezoid quadrature weights matching `values`.
  std::vector<double> weights() const;
  double integral() const;
};

DensityGrid kde(const Ensemble& e, const KdeConfig& cfg);
/// Tabulates f on a 1-D grid.
DensityGrid tabulate(const std::vector<double>& grid_v, const std::function<double(double)>& f);

struct Moments
{
  double mass = 1.0;
  std::vector<double> mean;
  /// (1/d) (1/N) sum |v_i - u|^2
  double temperature = 0.0;
};

Moments moments(const Ensemble& e);

/// |(1/N) sum v_i - m| (Euclidean norm).
double mean_error(const Ensemble& e, std::span<const double> m);
inline double mean_error(const Ensemble& e, double m)
{
  return mean_error(e, std::span<const double>(&m, 1));
}

/// Quadrature of f log f with 0 log 0 = 0.
double entropy_H(const DensityGrid& d);

/// Quadrature of |a - b|; throws ConfigError if the grids differ.
double l1_distance(const DensityGrid& a, const DensityGrid& b);

struct RepeatSummary
{
  std::size_t repeats = 0;
  double mean = 0.0;
  double rms = 0.0;
  /// Normal-approximation 95% band for the mean.
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Needs at least 2 values; throws ConfigError otherwise.
RepeatSummary rmse_over_repeats(std::span<const double> errors);

/// CSV with header `v,density` (1-D) or `x,v,density` (2-D).
void write_csv(std::ostream& os, const DensityGrid& d);

} // namespace rvrbm
