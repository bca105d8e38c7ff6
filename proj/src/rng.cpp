#include "rvrbm/rng.hpp"

#include "rvrbm/error.hpp"

#include <cmath>
#include <numbers>

namespace rvrbm {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k)
{
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

// Counter layout: word 0 is the block index inside the stream, words 1-2 the
// low halves of particle and step, word 3 packs the stream kind with 12 high
// bits of each index.
CounterStream::CounterStream(const RngKey& key)
{
  key_ = {static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)};
  const auto kind = static_cast<std::uint32_t>(key.kind) & 0xFFu;
  const auto p_hi = static_cast<std::uint32_t>(key.particle >> 32) & 0xFFFu;
  const auto s_hi = static_cast<std::uint32_t>(key.step >> 32) & 0xFFFu;
  counter_ = {0u, static_cast<std::uint32_t>(key.particle), static_cast<std::uint32_t>(key.step),
              kind | (p_hi << 8) | (s_hi << 20)};
}

void CounterStream::refill()
{
  buffer_ = philox4x32(counter_, key_);
  ++counter_[0];
  used_ = 0;
}

std::uint32_t CounterStream::next_u32()
{
  if (used_ == 4)
    refill();
  return buffer_[used_++];
}

std::uint64_t CounterStream::next_u64()
{
  const std::uint64_t hi = next_u32();
  return (hi << 32) | next_u32();
}

double CounterStream::uniform()
{
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterStream::below(std::uint64_t bound)
{
  // Lemire's multiply-shift with rejection.
  std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * bound;
  auto low = static_cast<std::uint32_t>(m);
  if (low < bound) {
    const auto threshold = static_cast<std::uint32_t>((0x100000000ull - bound) % bound);
    while (low < threshold) {
      m = static_cast<std::uint64_t>(next_u32()) * bound;
      low = static_cast<std::uint32_t>(m);
    }
  }
  return m >> 32;
}

double CounterStream::normal()
{
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void wiener_increment(const RngKey& key, double dt, std::span<double> out)
{
  if (!(dt > 0.0))
    throw ConfigError("wiener_increment: dt must be positive");
  CounterStream stream(key);
  const double scale = std::sqrt(dt);
  for (double& w : out)
    w = scale * stream.normal();
}

std::vector<double> wiener_increment(const RngKey& key, std::size_t dim, double dt)
{
  std::vector<double> out(dim);
  wiener_increment(key, dt, out);
  return out;
}

} // namespace rvrbm
