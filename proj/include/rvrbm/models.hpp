#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rvrbm {

// ---------------------------------------------------------------------------
// Interaction kernels P(x, y, v, w) >= 0
// ---------------------------------------------------------------------------

struct ConstantKernel
{
  double operator()(std::span<const double>, std::span<const double>, std::span<const double>,
                    std::span<const double>) const
  {
    return 1.0;
  }
};

/// Indicator of |v - w| <= delta (opinion distance).
struct BoundedConfidenceKernel
{
  double delta = 1.0;

  double operator()(std::span<const double>, std::span<const double>, std::span<const double> vi,
                    std::span<const double> vj) const
  {
    if (vi.size() == 1)
      return std::abs(vi[0] - vj[0]) <= delta ? 1.0 : 0.0;
    double d2 = 0.0;
    for (std::size_t c = 0; c < vi.size(); ++c) {
      const double d = vi[c] - vj[c];
      d2 += d * d;
    }
    return d2 <= delta * delta ? 1.0 : 0.0;
  }
};

/// Communication rate (xi^2 + |x - y|^2)^(-beta).
struct CuckerSmaleKernel
{
  double xi = 1.0;
  double beta = 0.1;

  double operator()(std::span<const double> xi_pos, std::span<const double> xj_pos,
                    std::span<const double>, std::span<const double>) const
  {
    double r2 = 0.0;
    for (std::size_t c = 0; c < xi_pos.size(); ++c) {
      const double d = xi_pos[c] - xj_pos[c];
      r2 += d * d;
    }
    return std::pow(xi * xi + r2, -beta);
  }
};

using KernelSpec = std::variant<ConstantKernel, BoundedConfidenceKernel, CuckerSmaleKernel>;

/// Checked evaluation; throws ConfigError on dimension mismatch or when a
/// position-dependent kernel is given empty positions.
double eval_kernel(const KernelSpec& k, std::span<const double> x_i, std::span<const double> x_j,
                   std::span<const double> v_i, std::span<const double> v_j);

void validate(const KernelSpec& k);
std::string describe(const KernelSpec& k);

// ---------------------------------------------------------------------------
// Diffusion: the Wiener multiplier sqrt(2 sigma^2 D^2(v))
// ---------------------------------------------------------------------------

struct NoDiffusion
{
};
struct ConstantDiffusion
{
  double sigma2 = 0.1;
};
/// D^2(v) = 1 - |v|^2, vanishing on the boundary of the opinion interval.
struct OpinionDiffusion
{
  double sigma2 = 0.1;
};

using DiffusionSpec = std::variant<NoDiffusion, ConstantDiffusion, OpinionDiffusion>;

double eval_diffusion_coefficient(const DiffusionSpec& d, std::span<const double> v);
inline double eval_diffusion_coefficient(const DiffusionSpec& d, double v)
{
  return eval_diffusion_coefficient(d, std::span<const double>(&v, 1));
}
bool has_noise(const DiffusionSpec& d);
void validate(const DiffusionSpec& d);
std::string describe(const DiffusionSpec& d);

// ---------------------------------------------------------------------------
// Surrogate interaction P~(x, v) for the control variate
// ---------------------------------------------------------------------------

enum class SurrogateKind
{
  case1,                 // P~ = 1
  case2,                 // P~ = 1 - |v|^2
  two_cluster_quadratic, // P~ = (v - 1/2)(v + 1/2)
  custom,
};

struct SurrogateSpec
{
  SurrogateKind kind = SurrogateKind::case1;
  std::function<double(std::span<const double>, std::span<const double>)> custom;
  /// Optional cluster centres U_k in velocity space; each centre has dim_v entries.
  std::vector<std::vector<double>> clusters;
};

double eval_surrogate(const SurrogateSpec& s, std::span<const double> x, std::span<const double> v);
inline double eval_surrogate(const SurrogateSpec& s, double v)
{
  return eval_surrogate(s, {}, std::span<const double>(&v, 1));
}
void validate(const SurrogateSpec& s);
SurrogateKind parse_surrogate_kind(const std::string& name);
std::string to_string(SurrogateKind kind);

// ---------------------------------------------------------------------------
// Model description
// ---------------------------------------------------------------------------

enum class InitialLaw
{
  uniform_opinion, // v ~ U[-1, 1]
  two_cluster,     // v ~ U([-3/4, -1/4] u [1/4, 3/4])
  uniform_phase,   // (x, v) ~ U([-1, 1]^dim_x x [-1, 1]^dim_v)
};

InitialLaw parse_initial_law(const std::string& name);
std::string to_string(InitialLaw law);
/// Mean velocity of the initial law (zero for all supported laws).
std::vector<double> law_mean(InitialLaw law, std::size_t dim_v);

struct ModelSpec
{
  KernelSpec kernel = ConstantKernel{};
  DiffusionSpec diffusion = NoDiffusion{};
  InitialLaw initial_law = InitialLaw::uniform_opinion;
  std::size_t dim_x = 0;
  std::size_t dim_v = 1;
  /// Velocities live in [-1, 1] (opinion models).
  bool opinion_domain = true;
};

void validate(const ModelSpec& m);

// ---------------------------------------------------------------------------
// Closed-form densities
// ---------------------------------------------------------------------------

/// Stationary law of the noisy opinion model with P = 1: a Beta law on
/// (-1, 1) with mean m and diffusion strength sigma2. Throws for |v| >= 1.
double beta_equilibrium_density(double m, double sigma2, double v);

/// Global Maxwellian (2 pi sigma2)^(-d/2) exp(-|v - u|^2 / (2 sigma2)).
double maxwellian_density(std::span<const double> u, double sigma2, std::span<const double> v);
inline double maxwellian_density(double u, double sigma2, double v)
{
  return maxwellian_density(std::span<const double>(&u, 1), sigma2, std::span<const double>(&v, 1));
}

} // namespace rvrbm
