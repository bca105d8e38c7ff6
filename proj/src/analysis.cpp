#include "rvrbm/analysis.hpp"

#include "rvrbm/error.hpp"
#include "rvrbm/format.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace rvrbm {

namespace {

void check_axis(const std::vector<double>& axis, const char* name)
{
  for (std::size_t a = 1; a < axis.size(); ++a)
    if (!(axis[a] > axis[a - 1]))
      throw ConfigError(std::string("KDE grid axis ") + name + " must be strictly increasing");
}

std::vector<double> trapezoid(const std::vector<double>& axis)
{
  std::vector<double> w(axis.size(), 0.0);
  if (axis.size() < 2) {
    if (!w.empty())
      w[0] = 1.0;
    return w;
  }
  for (std::size_t a = 0; a + 1 < axis.size(); ++a) {
    const double h = 0.5 * (axis[a + 1] - axis[a]);
    w[a] += h;
    w[a + 1] += h;
  }
  return w;
}

// Gaussian weights of every grid node for a particle at `centre`.
void gaussian_row(const std::vector<double>& axis, double centre, double sigma2,
                  std::vector<double>& out)
{
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2);
  out.resize(axis.size());
  for (std::size_t a = 0; a < axis.size(); ++a) {
    const double d = axis[a] - centre;
    out[a] = norm * std::exp(-d * d / (2.0 * sigma2));
  }
}

} // namespace

void validate(const KdeConfig& cfg)
{
  if (!(cfg.sigma2_kernel > 0.0))
    throw ConfigError("KDE bandwidth variance must be > 0");
  if (cfg.auto_phase_grid) {
    if (cfg.auto_points < 2)
      throw ConfigError("KDE grid needs at least 2 points per axis");
    return;
  }
  if (cfg.grid_v.empty())
    throw ConfigError("KDE grid has no velocity points");
  check_axis(cfg.grid_v, "v");
  check_axis(cfg.grid_x, "x");
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n)
{
  if (n < 2 || !(hi > lo))
    throw ConfigError("uniform_grid: need n >= 2 and hi > lo");
  std::vector<double> g(n);
  for (std::size_t a = 0; a < n; ++a)
    g[a] = lo + (hi - lo) * static_cast<double>(a) / static_cast<double>(n - 1);
  return g;
}

KdeConfig default_opinion_kde(double sigma2_kernel)
{
  return KdeConfig{sigma2_kernel, uniform_grid(-1.1, 1.1, 400), {}, false, 100};
}

KdeConfig default_phase_kde(const Ensemble& e, double sigma2_kernel, std::size_t points)
{
  if (e.dim_x() != 1 || e.dim_v() != 1)
    throw ConfigError("phase-space KDE needs dim_x = dim_v = 1");
  if (e.size() == 0)
    throw ConfigError("phase-space KDE of an empty ensemble");
  const auto [xmin, xmax] = std::minmax_element(e.positions().begin(), e.positions().end());
  const auto [vmin, vmax] = std::minmax_element(e.velocities().begin(), e.velocities().end());
  const double pad = 6.0 * std::sqrt(sigma2_kernel);
  return KdeConfig{sigma2_kernel, uniform_grid(*vmin - pad, *vmax + pad, points),
                   uniform_grid(*xmin - pad, *xmax + pad, points), false, points};
}

std::vector<double> DensityGrid::weights() const
{
  const auto wv = trapezoid(grid_v);
  if (!is_2d())
    return wv;
  const auto wx = trapezoid(grid_x);
  std::vector<double> w(wx.size() * wv.size());
  for (std::size_t a = 0; a < wx.size(); ++a)
    for (std::size_t b = 0; b < wv.size(); ++b)
      w[a * wv.size() + b] = wx[a] * wv[b];
  return w;
}

double DensityGrid::integral() const
{
  const auto w = weights();
  double s = 0.0;
  for (std::size_t a = 0; a < values.size(); ++a)
    s += w[a] * values[a];
  return s;
}

DensityGrid kde(const Ensemble& e, const KdeConfig& config)
{
  validate(config);
  if (e.size() == 0)
    throw ConfigError("kde: empty ensemble");
  const KdeConfig cfg = config.auto_phase_grid
                          ? default_phase_kde(e, config.sigma2_kernel, config.auto_points)
                          : config;
  DensityGrid d{cfg.grid_x, cfg.grid_v, {}};
  const double inv_n = 1.0 / static_cast<double>(e.size());
  const std::size_t nv = cfg.grid_v.size();

  if (!d.is_2d()) {
    if (e.dim_v() != 1)
      throw ConfigError("1-D KDE needs scalar velocities");
    d.values.assign(nv, 0.0);
    const double norm = inv_n / std::sqrt(2.0 * std::numbers::pi * cfg.sigma2_kernel);
#pragma omp parallel for schedule(static)
    for (std::size_t a = 0; a < nv; ++a) {
      double s = 0.0;
      for (double vi : e.velocities()) {
        const double t = cfg.grid_v[a] - vi;
        s += std::exp(-t * t / (2.0 * cfg.sigma2_kernel));
      }
      d.values[a] = norm * s;
    }
    return d;
  }

  if (e.dim_x() != 1 || e.dim_v() != 1)
    throw ConfigError("phase-space KDE needs dim_x = dim_v = 1");
  const std::size_t nx = cfg.grid_x.size();
  d.values.assign(nx * nv, 0.0);
  // The product kernel factorises, so each particle contributes an outer
  // product of its x and v rows. Rows of the output are owned per thread.
  std::vector<double> wx_all(e.size() * nx), wv_all(e.size() * nv);
#pragma omp parallel
  {
    std::vector<double> row;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < e.size(); ++i) {
      gaussian_row(cfg.grid_x, e.position(i)[0], cfg.sigma2_kernel, row);
      std::copy(row.begin(), row.end(), wx_all.begin() + static_cast<std::ptrdiff_t>(i * nx));
      gaussian_row(cfg.grid_v, e.velocity(i)[0], cfg.sigma2_kernel, row);
      std::copy(row.begin(), row.end(), wv_all.begin() + static_cast<std::ptrdiff_t>(i * nv));
    }
#pragma omp for schedule(static)
    for (std::size_t a = 0; a < nx; ++a) {
      double* out = d.values.data() + a * nv;
      for (std::size_t i = 0; i < e.size(); ++i) {
        const double wx = wx_all[i * nx + a];
        if (wx == 0.0)
          continue;
        const double* wv = wv_all.data() + i * nv;
        for (std::size_t b = 0; b < nv; ++b)
          out[b] += wx * wv[b];
      }
      for (std::size_t b = 0; b < nv; ++b)
        out[b] *= inv_n;
    }
  }
  return d;
}

DensityGrid tabulate(const std::vector<double>& grid_v, const std::function<double(double)>& f)
{
  DensityGrid d{{}, grid_v, std::vector<double>(grid_v.size())};
  for (std::size_t a = 0; a < grid_v.size(); ++a)
    d.values[a] = f(grid_v[a]);
  return d;
}

Moments moments(const Ensemble& e)
{
  if (e.size() == 0)
    throw ConfigError("moments: empty ensemble");
  Moments m;
  m.mean = e.mean_velocity();
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto v = e.velocity(i);
    for (std::size_t c = 0; c < v.size(); ++c)
      sum += (v[c] - m.mean[c]) * (v[c] - m.mean[c]);
  }
  m.temperature = sum / (static_cast<double>(e.size()) * static_cast<double>(e.dim_v()));
  return m;
}

double mean_error(const Ensemble& e, std::span<const double> m)
{
  if (m.size() != e.dim_v())
    throw ConfigError("mean_error: reference mean has the wrong dimension");
  const auto mean = e.mean_velocity();
  double s = 0.0;
  for (std::size_t c = 0; c < mean.size(); ++c)
    s += (mean[c] - m[c]) * (mean[c] - m[c]);
  return std::sqrt(s);
}

double entropy_H(const DensityGrid& d)
{
  const auto w = d.weights();
  double h = 0.0;
  for (std::size_t a = 0; a < d.values.size(); ++a)
    if (d.values[a] > 0.0)
      h += w[a] * d.values[a] * std::log(d.values[a]);
  return h;
}

double l1_distance(const DensityGrid& a, const DensityGrid& b)
{
  if (a.grid_v != b.grid_v || a.grid_x != b.grid_x || a.values.size() != b.values.size())
    throw ConfigError("l1_distance: density grids differ");
  const auto w = a.weights();
  double s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    s += w[k] * std::abs(a.values[k] - b.values[k]);
  return s;
}

RepeatSummary rmse_over_repeats(std::span<const double> errors)
{
  if (errors.size() < 2)
    throw ConfigError("rmse_over_repeats: need at least 2 repeats");
  RepeatSummary r;
  r.repeats = errors.size();
  const double n = static_cast<double>(errors.size());
  double sum = 0.0, sum2 = 0.0;
  for (double e : errors) {
    sum += e;
    sum2 += e * e;
  }
  r.mean = sum / n;
  r.rms = std::sqrt(sum2 / n);
  double var = 0.0;
  for (double e : errors)
    var += (e - r.mean) * (e - r.mean);
  var /= (n - 1.0);
  const double half = 1.959963984540054 * std::sqrt(var / n);
  r.ci_low = r.mean - half;
  r.ci_high = r.mean + half;
  return r;
}

void write_csv(std::ostream& os, const DensityGrid& d)
{
  if (!d.is_2d()) {
    os << "v,density\n";
    for (std::size_t a = 0; a < d.grid_v.size(); ++a)
      os << format_double(d.grid_v[a]) << ',' << format_double(d.values[a]) << '\n';
    return;
  }
  os << "x,v,density\n";
  const std::size_t nv = d.grid_v.size();
  for (std::size_t a = 0; a < d.grid_x.size(); ++a)
    for (std::size_t b = 0; b < nv; ++b)
      os << format_double(d.grid_x[a]) << ',' << format_double(d.grid_v[b]) << ','
         << format_double(d.values[a * nv + b]) << '\n';
}

} // namespace rvrbm
