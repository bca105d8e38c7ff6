#include "rvrbm/ensemble.hpp"

#include "rvrbm/error.hpp"

#include <cmath>
#include <string>

namespace rvrbm {

Ensemble::Ensemble(std::size_t n, std::size_t dim_x, std::size_t dim_v, bool opinion_domain)
  : n_(n), dim_x_(dim_x), dim_v_(dim_v), opinion_domain_(opinion_domain), x_(n * dim_x, 0.0),
    v_(n * dim_v, 0.0)
{
  if (dim_v == 0)
    throw ConfigError("Ensemble: velocity dimension must be >= 1");
}

Ensemble::Ensemble(std::vector<double> x, std::vector<double> v, std::size_t dim_x,
                   std::size_t dim_v, bool opinion_domain)
  : n_(dim_v ? v.size() / dim_v : 0), dim_x_(dim_x), dim_v_(dim_v),
    opinion_domain_(opinion_domain), x_(std::move(x)), v_(std::move(v))
{
  if (dim_v == 0)
    throw ConfigError("Ensemble: velocity dimension must be >= 1");
  if (v_.size() != n_ * dim_v_ || x_.size() != n_ * dim_x_)
    throw ConfigError("Ensemble: position and velocity row counts differ");
}

Ensemble Ensemble::opinions(std::vector<double> v)
{
  return Ensemble({}, std::move(v), 0, 1, true);
}

std::vector<double> Ensemble::mean_velocity() const
{
  std::vector<double> mean(dim_v_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t c = 0; c < dim_v_; ++c)
      mean[c] += v_[i * dim_v_ + c];
  for (double& m : mean)
    m /= static_cast<double>(n_);
  return mean;
}

std::size_t Ensemble::first_non_finite() const
{
  for (std::size_t i = 0; i < n_; ++i) {
    for (double c : position(i))
      if (!std::isfinite(c))
        return i;
    for (double c : velocity(i))
      if (!std::isfinite(c))
        return i;
  }
  return n_;
}

void Ensemble::check_invariants(long step) const
{
  const std::size_t bad = first_non_finite();
  if (bad != n_)
    throw SimulationError("non-finite state for particle " + std::to_string(bad) + " at step " +
                            std::to_string(step),
                          step);
  if (opinion_domain_)
    for (double c : v_)
      if (c < -1.0 || c > 1.0)
        throw SimulationError("opinion left [-1, 1] at step " + std::to_string(step), step);
}

Ensemble init_ensemble(const ModelSpec& model, std::size_t n, std::uint64_t seed)
{
  if (n == 0)
    throw ConfigError("init_ensemble: n must be >= 1");
  validate(model);
  Ensemble e(n, model.dim_x, model.dim_v, model.opinion_domain);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    CounterStream stream(RngKey{seed, StreamKind::init, i, 0});
    auto x = e.position(i);
    auto v = e.velocity(i);
    switch (model.initial_law) {
    case InitialLaw::uniform_opinion:
      v[0] = stream.uniform(-1.0, 1.0);
      break;
    case InitialLaw::two_cluster: {
      // uniform on [1/4, 3/4], then a fair sign
      const double magnitude = stream.uniform(0.25, 0.75);
      v[0] = stream.uniform() < 0.5 ? -magnitude : magnitude;
      break;
    }
    case InitialLaw::uniform_phase:
      for (double& c : x)
        c = stream.uniform(-1.0, 1.0);
      for (double& c : v)
        c = stream.uniform(-1.0, 1.0);
      break;
    }
  }
  return e;
}

} // namespace rvrbm
