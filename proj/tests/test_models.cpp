#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rvrbm/error.hpp"
#include "rvrbm/models.hpp"
#include "rvrbm/rng.hpp"

#include <cmath>
#include <numbers>

using namespace rvrbm;
using V = std::vector<double>;

TEST_CASE("kernel values")
{
  const KernelSpec bc = BoundedConfidenceKernel{0.5};
  CHECK(eval_kernel(bc, {}, {}, V{0.0}, V{0.4}) == 1.0);
  CHECK(eval_kernel(bc, {}, {}, V{0.0}, V{0.6}) == 0.0);
  CHECK(eval_kernel(bc, {}, {}, V{0.1}, V{0.6}) == 1.0); // boundary is inside

  const KernelSpec cs = CuckerSmaleKernel{1.0, 0.1};
  CHECK(eval_kernel(cs, V{0.3}, V{0.3}, V{0}, V{0}) == 1.0);
  CHECK(eval_kernel(cs, V{0.0}, V{std::sqrt(3.0)}, V{0}, V{0}) ==
        doctest::Approx(std::pow(4.0, -0.1)));
  CHECK(eval_kernel(cs, V{0.0}, V{std::sqrt(3.0)}, V{0}, V{0}) ==
        doctest::Approx(0.870551).epsilon(1e-6));
  CHECK(eval_kernel(ConstantKernel{}, {}, {}, V{-1}, V{1}) == 1.0);
}

TEST_CASE("kernels are symmetric")
{
  const std::vector<KernelSpec> kernels{ConstantKernel{}, BoundedConfidenceKernel{0.7},
                                        CuckerSmaleKernel{0.5, 0.3}};
  CounterStream s(RngKey{2, StreamKind::init, 0, 0});
  for (const auto& k : kernels)
    for (int t = 0; t < 200; ++t) {
      const V xi{s.uniform(-2, 2), s.uniform(-2, 2)}, xj{s.uniform(-2, 2), s.uniform(-2, 2)};
      const V vi{s.uniform(-1, 1), s.uniform(-1, 1)}, vj{s.uniform(-1, 1), s.uniform(-1, 1)};
      CHECK(eval_kernel(k, xi, xj, vi, vj) == eval_kernel(k, xj, xi, vj, vi));
    }
}

TEST_CASE("kernel argument errors")
{
  CHECK_THROWS_AS(eval_kernel(CuckerSmaleKernel{}, {}, {}, V{0}, V{0}), ConfigError);
  CHECK_THROWS_AS(eval_kernel(ConstantKernel{}, {}, {}, V{0}, V{0, 1}), ConfigError);
  CHECK_THROWS_AS(validate(KernelSpec{BoundedConfidenceKernel{-1.0}}), ConfigError);
  CHECK_THROWS_AS(validate(KernelSpec{CuckerSmaleKernel{1.0, -0.5}}), ConfigError);
}

TEST_CASE("diffusion coefficients")
{
  const double s = std::sqrt(0.2);
  CHECK(eval_diffusion_coefficient(ConstantDiffusion{0.1}, 0.7) == doctest::Approx(s));
  CHECK(eval_diffusion_coefficient(OpinionDiffusion{0.1}, 0.0) == doctest::Approx(0.447214));
  CHECK(eval_diffusion_coefficient(OpinionDiffusion{0.1}, 1.0) == 0.0);
  CHECK(eval_diffusion_coefficient(OpinionDiffusion{0.1}, -1.0) == 0.0);
  CHECK(eval_diffusion_coefficient(OpinionDiffusion{0.1}, 0.5) ==
        doctest::Approx(std::sqrt(0.2 * 0.75)));
  CHECK(eval_diffusion_coefficient(NoDiffusion{}, 0.3) == 0.0);
  CHECK(!has_noise(NoDiffusion{}));
  CHECK(has_noise(OpinionDiffusion{0.1}));
  CHECK_THROWS_AS(validate(DiffusionSpec{ConstantDiffusion{-0.1}}), ConfigError);
}

TEST_CASE("surrogates")
{
  SurrogateSpec s;
  for (double v : {-1.0, -0.3, 0.0, 0.9})
    CHECK(eval_surrogate(s, v) == 1.0);
  s.kind = SurrogateKind::case2;
  CHECK(eval_surrogate(s, 0.0) == 1.0);
  CHECK(eval_surrogate(s, 1.0) == 0.0);
  CHECK(eval_surrogate(s, -1.0) == 0.0);
  s.kind = SurrogateKind::two_cluster_quadratic;
  CHECK(eval_surrogate(s, 0.5) == 0.0);
  CHECK(eval_surrogate(s, -0.5) == 0.0);
  CHECK(eval_surrogate(s, 0.0) == -0.25);

  s.kind = SurrogateKind::custom;
  CHECK_THROWS_AS(eval_surrogate(s, 0.0), ConfigError);
  s.custom = [](std::span<const double>, std::span<const double> v) { return 3.0 * v[0]; };
  CHECK(eval_surrogate(s, 2.0) == 6.0);

  SurrogateSpec dup;
  dup.clusters = {{0.5}, {0.5}};
  CHECK_THROWS_AS(validate(dup), ConfigError);
  CHECK(parse_surrogate_kind("case2") == SurrogateKind::case2);
  CHECK_THROWS_AS(parse_surrogate_kind("case3"), ConfigError);
}

TEST_CASE("initial law names")
{
  CHECK(parse_initial_law("uniform") == InitialLaw::uniform_opinion);
  CHECK(parse_initial_law(to_string(InitialLaw::two_cluster)) == InitialLaw::two_cluster);
  CHECK_THROWS_AS(parse_initial_law("gaussian"), ConfigError);
  CHECK(law_mean(InitialLaw::uniform_phase, 3) == V{0, 0, 0});
}

TEST_CASE("beta equilibrium density")
{
  // 1 / (2^19 B(10, 10)) with B(10, 10) = (9!)^2 / 19!
  const double fact9 = 362880.0;
  double fact19 = 1.0;
  for (int k = 2; k <= 19; ++k)
    fact19 *= k;
  const double peak = fact19 / (fact9 * fact9) / std::pow(2.0, 19);
  CHECK(beta_equilibrium_density(0.0, 0.1, 0.0) == doctest::Approx(peak).epsilon(1e-12));
  CHECK(peak == doctest::Approx(1.76197).epsilon(1e-5));

  for (double sigma2 : {0.05, 0.1, 0.3})
    for (double v : {0.1, 0.45, 0.9})
      CHECK(beta_equilibrium_density(0.0, sigma2, v) ==
            doctest::Approx(beta_equilibrium_density(0.0, sigma2, -v)).epsilon(1e-14));

  // Midpoint rule on 10^4 cells.
  for (double m : {0.0, 0.3}) {
    const int n = 10000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k)
      sum += beta_equilibrium_density(m, 0.1, -1.0 + (k + 0.5) * 2.0 / n) * 2.0 / n;
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(beta_equilibrium_density(0.0, 0.1, 1.0), ConfigError);
}

TEST_CASE("maxwellian density")
{
  CHECK(maxwellian_density(0.0, 1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));
  CHECK(maxwellian_density(0.0, 1.0, 0.0) == doctest::Approx(0.398942).epsilon(1e-6));
  for (double v : {-0.5, 0.3, 1.1})
    CHECK(maxwellian_density(0.2, 0.5, v) < maxwellian_density(0.2, 0.5, 0.2));

  const double sigma2 = 0.7, sd = std::sqrt(sigma2);
  const int n = 20000;
  const double h = 16 * sd / n;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k)
    sum += (k == 0 || k == n ? 0.5 : 1.0) * maxwellian_density(0.1, sigma2, 0.1 - 8 * sd + k * h);
  CHECK(std::abs(sum * h - 1.0) < 1e-6);

  const V u{0, 0}, v{0, 0};
  CHECK(maxwellian_density(u, 1.0, v) == doctest::Approx(1.0 / (2 * std::numbers::pi)));
}

TEST_CASE("model validation")
{
  ModelSpec m;
  CHECK_NOTHROW(validate(m));
  m.kernel = CuckerSmaleKernel{};
  CHECK_THROWS_AS(validate(m), ConfigError); // needs positions
  m.dim_x = 1;
  m.initial_law = InitialLaw::uniform_phase;
  CHECK_NOTHROW(validate(m));
  m.dim_v = 0;
  CHECK_THROWS_AS(validate(m), ConfigError);
}
