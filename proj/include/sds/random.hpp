#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sds {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Each (key, counter-prefix) pair is an independent stream, so a Monte Carlo
/// trial can be given its own stream from (seed, tag, trial index) without any
/// shared state. Satisfies UniformRandomBitGenerator with 32-bit output.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using counter_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  Philox4x32() = default;
  Philox4x32(key_type key, counter_type counter) : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (index_ == 4) {
      block_ = encrypt(counter_, key_);
      increment();
      index_ = 0;
    }
    return block_[index_++];
  }

  /// Ten rounds of the Philox bijection applied to one counter block.
  static constexpr counter_type encrypt(counter_type ctr, key_type key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  // Only the low 64 bits count blocks; the high words carry the stream index.
  void increment() {
    if (++counter_[0] == 0) ++counter_[1];
  }

  key_type key_{};
  counter_type counter_{};
  counter_type block_{};
  int index_ = 4;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Hashes a list of integers into one 64-bit tag. Used to name streams, e.g.
/// {domain, cell, k} in the solver.
constexpr std::uint64_t stream_tag(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

/// Stream number `index` of the family (seed, tag).
inline Philox4x32 make_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  const std::uint64_t k = splitmix64(seed ^ splitmix64(tag));
  return Philox4x32({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)},
                    {0u, 0u, static_cast<std::uint32_t>(index),
                     static_cast<std::uint32_t>(index >> 32)});
}

/// Uniform on [0, 1) with 53 random bits drawn from two 32-bit outputs.
template <class Gen>
double uniform01(Gen& gen) {
  static_assert(Gen::max() - Gen::min() == 0xFFFFFFFFu, "expects a 32-bit generator");
  const std::uint64_t hi = gen() - Gen::min();
  const std::uint64_t lo = gen() - Gen::min();
  return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1]; safe to pass to log().
template <class Gen>
double uniform01_open_left(Gen& gen) {
  return 1.0 - uniform01(gen);
}

// Stream families used across the library. Values are part of the
// reproducibility contract: changing them changes every seeded result.
namespace streams {
inline constexpr std::uint64_t kEvaluate = 1;
inline constexpr std::uint64_t kConditional = 2;
inline constexpr std::uint64_t kSolverCell = 3;
inline constexpr std::uint64_t kPn = 4;
inline constexpr std::uint64_t kConcentration = 5;
inline constexpr std::uint64_t kCheck = 6;
}  // namespace streams

}  // namespace sds
