#pragma once

// Inner interaction loops shared by the drift evaluators and the stepper.
// The kernel type is a template parameter so each loop is compiled once per
// kernel with the evaluation inlined.

#include "rvrbm/ensemble.hpp"
#include "rvrbm/models.hpp"

#include <algorithm>
#include <span>

namespace rvrbm::detail {

/// out += sum_{j in range} P(x_i, x_j, v_i, v_j)(v_j - v_i)
template <class Kernel, class IndexRange>
inline void add_interactions(const Ensemble& e, const Kernel& k, std::size_t i, const IndexRange& js,
                             std::span<double> out)
{
  const auto xi = e.position(i);
  const auto vi = e.velocity(i);
  const std::size_t dv = e.dim_v();
  for (std::size_t j : js) {
    if (j == i)
      continue;
    const auto vj = e.velocity(j);
    const double w = k(xi, e.position(j), vi, vj);
    for (std::size_t c = 0; c < dv; ++c)
      out[c] += w * (vj[c] - vi[c]);
  }
}

/// Counting range [0, n) usable in a range-for.
struct Iota
{
  std::size_t n;
  struct It
  {
    std::size_t j;
    std::size_t operator*() const { return j; }
    It& operator++()
    {
      ++j;
      return *this;
    }
    bool operator!=(const It& o) const { return j != o.j; }
  };
  It begin() const { return {0}; }
  It end() const { return {n}; }
};

template <class F>
inline decltype(auto) with_kernel(const KernelSpec& k, F&& f)
{
  return std::visit(std::forward<F>(f), k);
}

} // namespace rvrbm::detail
