#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rvrbm/batch.hpp"
#include "rvrbm/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace rvrbm;

namespace {

RngKey shuffle_key(std::uint64_t seed, std::uint64_t step)
{
  return RngKey{seed, StreamKind::batch_shuffle, 0, step};
}

Ensemble random_opinions(std::size_t n, std::uint64_t seed)
{
  CounterStream s(RngKey{seed, StreamKind::init, 0, 0});
  std::vector<double> v(n);
  for (double& x : v)
    x = s.uniform(-1, 1);
  return Ensemble::opinions(v);
}

std::vector<std::size_t> sorted(std::span<const std::size_t> s)
{
  std::vector<std::size_t> out(s.begin(), s.end());
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("partition into pairs")
{
  const auto plan = make_batches(4, 2, shuffle_key(1, 0));
  REQUIRE(plan.num_batches() == 2);
  std::set<std::size_t> seen;
  for (std::size_t b = 0; b < 2; ++b) {
    CHECK(plan.batch(b).size() == 2);
    for (std::size_t j : plan.batch(b))
      seen.insert(j);
  }
  CHECK(seen == std::set<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("remainder batch")
{
  const auto plan = make_batches(5, 2, shuffle_key(1, 0));
  std::multiset<std::size_t> sizes;
  for (std::size_t b = 0; b < plan.num_batches(); ++b)
    sizes.insert(plan.batch(b).size());
  CHECK(sizes == std::multiset<std::size_t>{1, 2, 2});
}

TEST_CASE("every particle sits in its own batch exactly once")
{
  for (std::size_t n : {10u, 97u, 1000u})
    for (std::size_t m : {2u, 3u, 9u}) {
      const auto plan = make_batches(n, m, shuffle_key(n + m, 3));
      std::vector<int> count(n, 0);
      for (std::size_t b = 0; b < plan.num_batches(); ++b)
        for (std::size_t j : plan.batch(b))
          ++count[j];
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(count[i] == 1);
        const auto s = plan.batch_of(i);
        CHECK(std::find(s.begin(), s.end(), i) != s.end());
      }
    }
}

TEST_CASE("pairings of four particles are equally likely")
{
  // The three pair partitions of {0,1,2,3} are identified by 0's partner.
  std::map<std::size_t, int> freq;
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) {
    const auto plan = make_batches(4, 2, shuffle_key(5, k));
    const auto s = plan.batch_of(0);
    ++freq[s[0] == 0 ? s[1] : s[0]];
  }
  REQUIRE(freq.size() == 3);
  for (const auto& [partner, count] : freq)
    CHECK(std::abs(double(count) / draws - 1.0 / 3.0) < 0.02);
}

TEST_CASE("per-particle batches")
{
  const std::size_t n = 50, m = 7;
  const auto plan = make_batches(n, m, shuffle_key(2, 1), BatchingMode::per_particle);
  CHECK(plan.mode() == BatchingMode::per_particle);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = sorted(plan.batch_of(i));
    CHECK(s.size() == m);
    CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
    CHECK(std::binary_search(s.begin(), s.end(), i));
  }
  // Particle i's batch depends only on (seed, i, step).
  const auto other = make_batches(n, m, shuffle_key(2, 1), BatchingMode::per_particle);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(sorted(plan.batch_of(i)) == sorted(other.batch_of(i)));
}

TEST_CASE("batch size bounds name the values")
{
  for (auto [n, m] : {std::pair<std::size_t, std::size_t>{10, 10}, {10, 1}, {10, 11}}) {
    try {
      make_batches(n, m, shuffle_key(1, 0));
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(std::to_string(m)) != std::string::npos);
      CHECK(msg.find(std::to_string(n)) != std::string::npos);
    }
  }
  CHECK_THROWS_AS(BatchPlan::from_batches({{0, 1}, {1, 2}}), ConfigError);
  CHECK_THROWS_AS(BatchPlan::from_batches({{0, 2}}), ConfigError);
  CHECK_NOTHROW(BatchPlan::from_batches({{2, 0}, {1}}));
}

TEST_CASE("full drift examples")
{
  const auto e = Ensemble::opinions({0.0, 1.0});
  CHECK(full_drift(e, ConstantKernel{}, 0)[0] == doctest::Approx(0.5));
  CHECK(full_drift(e, ConstantKernel{}, 1)[0] == doctest::Approx(-0.5));

  const auto same = Ensemble::opinions({0.3, 0.3, 0.3, 0.3});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(full_drift(same, BoundedConfidenceKernel{1.0}, i)[0] == 0.0);
    CHECK(batch_drift(same, ConstantKernel{}, make_batches(4, 2, shuffle_key(1, 0)), i)[0] == 0.0);
  }

  const auto apart = Ensemble::opinions({-0.5, 0.5});
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(full_drift(apart, BoundedConfidenceKernel{0.5}, i)[0] == 0.0);
}

TEST_CASE("a single batch of everyone reproduces the full drift")
{
  const auto e = random_opinions(40, 3);
  const auto plan = BatchPlan::whole(40);
  for (const KernelSpec& k : {KernelSpec{ConstantKernel{}}, KernelSpec{BoundedConfidenceKernel{0.4}}})
    for (std::size_t i = 0; i < 40; ++i)
      CHECK(batch_drift(e, k, plan, i) == full_drift(e, k, i));
}

TEST_CASE("constant kernel drift is the batch mean minus v_i")
{
  const auto e = random_opinions(103, 4);
  for (auto mode : {BatchingMode::partition, BatchingMode::per_particle}) {
    const auto plan = make_batches(103, 6, shuffle_key(8, 2), mode);
    for (std::size_t i = 0; i < 103; ++i) {
      double direct = 0.0;
      for (std::size_t j : plan.batch_of(i))
        direct += e.velocity(j)[0];
      direct /= double(plan.batch_of(i).size());
      CHECK(batch_drift(e, ConstantKernel{}, plan, i)[0] ==
            doctest::Approx(direct - e.velocity(i)[0]).epsilon(1e-13));
      CHECK(batch_mean_velocity(e, plan, i)[0] == doctest::Approx(direct).epsilon(1e-13));
    }
  }
}

TEST_CASE("divisor option")
{
  const auto e = Ensemble::opinions({0.0, 1.0, 0.5});
  const auto plan = BatchPlan::from_batches({{0, 1, 2}});
  CHECK(batch_drift(e, ConstantKernel{}, plan, 0, BatchDivisor::batch_size)[0] ==
        doctest::Approx(0.5));
  std::vector<double> out(1);
  batch_drift(e, ConstantKernel{}, plan, 0, out, BatchDivisor::batch_size_minus_one);
  CHECK(out[0] == doctest::Approx(0.75));
}

TEST_CASE("batch mean velocity")
{
  const auto e = Ensemble::opinions({0.2, 0.4, -0.9});
  const auto plan = BatchPlan::from_batches({{0, 1}, {2}});
  CHECK(batch_mean_velocity(e, plan, 0)[0] == doctest::Approx(0.3));
  CHECK(batch_mean_velocity(e, plan, 2)[0] == -0.9);
  CHECK(batch_drift(e, ConstantKernel{}, plan, 2)[0] == 0.0);
  CHECK(batch_mean_velocity(e, BatchPlan::whole(3), 1)[0] == doctest::Approx(-0.1));
}

TEST_CASE("symmetric kernels conserve momentum inside each batch")
{
  const auto e = random_opinions(200, 6);
  for (const KernelSpec& k : {KernelSpec{ConstantKernel{}}, KernelSpec{BoundedConfidenceKernel{0.3}}}) {
    const auto plan = make_batches(200, 7, shuffle_key(6, 9));
    for (std::size_t b = 0; b < plan.num_batches(); ++b) {
      double total = 0.0;
      for (std::size_t i : plan.batch(b))
        total += batch_drift(e, k, plan, i)[0] * double(plan.batch(b).size());
      CHECK(std::abs(total) < 1e-12);
    }
  }
}

TEST_CASE("variance of the batch mean over all pair partitions")
{
  // Oracle: enumerate the three pairings of v = (1,2,3,4). Over pairings and
  // particles every 2-subset of v is seen equally often, so this is the
  // variance of a sample mean drawn without replacement.
  const std::vector<double> v{1, 2, 3, 4};
  const std::vector<std::vector<std::vector<std::size_t>>> pairings{
    {{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}, {{0, 3}, {1, 2}}};
  const auto e = Ensemble::opinions(v);
  double s1 = 0, s2 = 0;
  int count = 0;
  for (const auto& p : pairings) {
    const auto plan = BatchPlan::from_batches(p);
    for (std::size_t i = 0; i < 4; ++i) {
      const double u = batch_mean_velocity(e, plan, i)[0];
      s1 += u;
      s2 += u * u;
      ++count;
    }
  }
  const double var = s2 / count - (s1 / count) * (s1 / count);
  // theta^2 (1/M - 1/N) with the Bessel-corrected variance 5/3 of v.
  CHECK(std::abs(var - (5.0 / 3.0) * (0.5 - 0.25)) < 1e-12);
  CHECK(std::abs(var - 0.4166667) < 1e-7);
}
