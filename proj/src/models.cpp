#include "rvrbm/models.hpp"

#include "rvrbm/error.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace rvrbm {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};

} // namespace

double eval_kernel(const KernelSpec& k, std::span<const double> x_i, std::span<const double> x_j,
                   std::span<const double> v_i, std::span<const double> v_j)
{
  if (x_i.size() != x_j.size() || v_i.size() != v_j.size())
    throw ConfigError("eval_kernel: argument dimensions do not match");
  if (std::holds_alternative<CuckerSmaleKernel>(k) && x_i.empty())
    throw ConfigError("eval_kernel: Cucker-Smale kernel needs positions");
  if (std::holds_alternative<BoundedConfidenceKernel>(k) && v_i.empty())
    throw ConfigError("eval_kernel: bounded-confidence kernel needs velocities");
  return std::visit([&](const auto& kernel) { return kernel(x_i, x_j, v_i, v_j); }, k);
}

void validate(const KernelSpec& k)
{
  std::visit(overloaded{
               [](const ConstantKernel&) {},
               [](const BoundedConfidenceKernel& b) {
                 if (!(b.delta > 0.0))
                   throw ConfigError("bounded-confidence threshold delta must be > 0");
               },
               [](const CuckerSmaleKernel& c) {
                 if (!(c.xi > 0.0))
                   throw ConfigError("Cucker-Smale length scale xi must be > 0");
                 if (!(c.beta >= 0.0))
                   throw ConfigError("Cucker-Smale exponent beta must be >= 0");
               },
             },
             k);
}

std::string describe(const KernelSpec& k)
{
  std::ostringstream os;
  std::visit(overloaded{
               [&](const ConstantKernel&) { os << "constant"; },
               [&](const BoundedConfidenceKernel& b) { os << "bounded_confidence(delta=" << b.delta << ")"; },
               [&](const CuckerSmaleKernel& c) { os << "cucker_smale(xi=" << c.xi << ",beta=" << c.beta << ")"; },
             },
             k);
  return os.str();
}

double eval_diffusion_coefficient(const DiffusionSpec& d, std::span<const double> v)
{
  return std::visit(overloaded{
                      [](const NoDiffusion&) { return 0.0; },
                      [](const ConstantDiffusion& c) { return std::sqrt(2.0 * c.sigma2); },
                      [&](const OpinionDiffusion& o) {
                        double v2 = 0.0;
                        for (double c : v)
                          v2 += c * c;
                        const double d2 = std::max(0.0, 1.0 - v2);
                        return std::sqrt(2.0 * o.sigma2 * d2);
                      },
                    },
                    d);
}

bool has_noise(const DiffusionSpec& d)
{
  return !std::holds_alternative<NoDiffusion>(d);
}

void validate(const DiffusionSpec& d)
{
  std::visit(overloaded{
               [](const NoDiffusion&) {},
               [](const ConstantDiffusion& c) {
                 if (!(c.sigma2 > 0.0))
                   throw ConfigError("diffusion sigma2 must be > 0");
               },
               [](const OpinionDiffusion& o) {
                 if (!(o.sigma2 > 0.0))
                   throw ConfigError("diffusion sigma2 must be > 0");
               },
             },
             d);
}

std::string describe(const DiffusionSpec& d)
{
  std::ostringstream os;
  std::visit(overloaded{
               [&](const NoDiffusion&) { os << "none"; },
               [&](const ConstantDiffusion& c) { os << "constant(sigma2=" << c.sigma2 << ")"; },
               [&](const OpinionDiffusion& o) { os << "opinion(sigma2=" << o.sigma2 << ")"; },
             },
             d);
  return os.str();
}

double eval_surrogate(const SurrogateSpec& s, std::span<const double> x, std::span<const double> v)
{
  switch (s.kind) {
  case SurrogateKind::case1:
    return 1.0;
  case SurrogateKind::case2: {
    double v2 = 0.0;
    for (double c : v)
      v2 += c * c;
    return 1.0 - v2;
  }
  case SurrogateKind::two_cluster_quadratic: {
    double v2 = 0.0;
    for (double c : v)
      v2 += c * c;
    return v2 - 0.25;
  }
  case SurrogateKind::custom:
    if (!s.custom)
      throw ConfigError("custom surrogate has no function bound");
    return s.custom(x, v);
  }
  return 0.0;
}

void validate(const SurrogateSpec& s)
{
  if (s.kind == SurrogateKind::custom && !s.custom)
    throw ConfigError("custom surrogate has no function bound");
  for (std::size_t a = 0; a < s.clusters.size(); ++a) {
    if (s.clusters[a].empty())
      throw ConfigError("cluster centre has no components");
    for (std::size_t b = 0; b < a; ++b)
      if (s.clusters[a] == s.clusters[b])
        throw ConfigError("cluster centres must be pairwise distinct");
  }
}

SurrogateKind parse_surrogate_kind(const std::string& name)
{
  if (name == "case1")
    return SurrogateKind::case1;
  if (name == "case2")
    return SurrogateKind::case2;
  if (name == "two_cluster_quadratic")
    return SurrogateKind::two_cluster_quadratic;
  if (name == "custom")
    return SurrogateKind::custom;
  throw ConfigError("unknown surrogate '" + name + "' (expected case1, case2, two_cluster_quadratic)");
}

std::string to_string(SurrogateKind kind)
{
  switch (kind) {
  case SurrogateKind::case1:
    return "case1";
  case SurrogateKind::case2:
    return "case2";
  case SurrogateKind::two_cluster_quadratic:
    return "two_cluster_quadratic";
  case SurrogateKind::custom:
    return "custom";
  }
  return "?";
}

InitialLaw parse_initial_law(const std::string& name)
{
  if (name == "uniform_opinion" || name == "uniform")
    return InitialLaw::uniform_opinion;
  if (name == "two_cluster")
    return InitialLaw::two_cluster;
  if (name == "uniform_phase")
    return InitialLaw::uniform_phase;
  throw ConfigError("unknown initial distribution '" + name +
                    "' (expected uniform_opinion, two_cluster, uniform_phase)");
}

std::string to_string(InitialLaw law)
{
  switch (law) {
  case InitialLaw::uniform_opinion:
    return "uniform_opinion";
  case InitialLaw::two_cluster:
    return "two_cluster";
  case InitialLaw::uniform_phase:
    return "uniform_phase";
  }
  return "?";
}

std::vector<double> law_mean(InitialLaw, std::size_t dim_v)
{
  return std::vector<double>(dim_v, 0.0);
}

void validate(const ModelSpec& m)
{
  validate(m.kernel);
  validate(m.diffusion);
  if (m.dim_v < 1)
    throw ConfigError("velocity dimension must be >= 1");
  if (std::holds_alternative<CuckerSmaleKernel>(m.kernel) && m.dim_x == 0)
    throw ConfigError("Cucker-Smale kernel needs a spatial dimension >= 1");
  if (m.initial_law != InitialLaw::uniform_phase && m.dim_x != 0)
    throw ConfigError("opinion initial laws are space homogeneous (dim_x must be 0)");
  if (m.initial_law != InitialLaw::uniform_phase && m.dim_v != 1)
    throw ConfigError("opinion initial laws are one dimensional (dim_v must be 1)");
  if (std::holds_alternative<OpinionDiffusion>(m.diffusion) && !m.opinion_domain)
    throw ConfigError("opinion diffusion requires the bounded opinion domain");
}

double beta_equilibrium_density(double m, double sigma2, double v)
{
  if (!(sigma2 > 0.0))
    throw ConfigError("beta_equilibrium_density: sigma2 must be > 0");
  if (!(std::abs(m) < 1.0))
    throw ConfigError("beta_equilibrium_density: |m| must be < 1");
  if (!(std::abs(v) < 1.0))
    throw ConfigError("beta_equilibrium_density: |v| must be < 1");
  const double a = (1.0 + m) / sigma2;
  const double b = (1.0 - m) / sigma2;
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double log_f = (a - 1.0) * std::log1p(v) + (b - 1.0) * std::log1p(-v) -
                       (2.0 / sigma2 - 1.0) * std::numbers::ln2 - log_beta;
  return std::exp(log_f);
}

double maxwellian_density(std::span<const double> u, double sigma2, std::span<const double> v)
{
  if (!(sigma2 > 0.0))
    throw ConfigError("maxwellian_density: sigma2 must be > 0");
  if (u.size() != v.size())
    throw ConfigError("maxwellian_density: dimension mismatch");
  double r2 = 0.0;
  for (std::size_t c = 0; c < v.size(); ++c)
    r2 += (v[c] - u[c]) * (v[c] - u[c]);
  const double d = static_cast<double>(v.size());
  return std::pow(2.0 * std::numbers::pi * sigma2, -0.5 * d) * std::exp(-r2 / (2.0 * sigma2));
}

} // namespace rvrbm
