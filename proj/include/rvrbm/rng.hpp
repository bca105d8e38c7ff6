#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace rvrbm {

enum class StreamKind : std::uint32_t
{
  init = 1,
  wiener = 2,
  batch_shuffle = 3,
};

/// Address of an independent random stream. Every stochastic quantity in a
/// run is a pure function of one of these, so draws never depend on the
/// order in which particles are visited or on the thread count.
struct RngKey
{
  std::uint64_t seed = 0;
  StreamKind kind = StreamKind::init;
  std::uint64_t particle = 0;
  std::uint64_t step = 0;

  friend bool operator==(const RngKey&, const RngKey&) = default;
};

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Sequential draws from the stream addressed by a key. The n-th draw of a
/// stream is always the same value; distinct keys map to disjoint Philox
/// counter ranges.
class CounterStream
{
public:
  explicit CounterStream(const RngKey& key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, bound); bound must be in [1, 2^32].
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller.
  double normal();

private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Gaussian increment with mean 0 and per-component variance dt, written
/// into `out` (out.size() components). Throws ConfigError if dt <= 0.
void wiener_increment(const RngKey& key, double dt, std::span<double> out);
std::vector<double> wiener_increment(const RngKey& key, std::size_t dim, double dt);

} // namespace rvrbm
