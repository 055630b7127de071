#pragma once

#include "cohaudit/core.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace cohaudit {

/// xoshiro256** (Blackman & Vigna) seeded through SplitMix64.
///
/// Streams are never shared between purposes: every consumer derives its own
/// generator with `Rng::stream(seed, tag, index)`, where `tag` names the
/// purpose ("matrix", "support", "noise", ...) and `index` is typically a
/// trial number. The derivation is
///
///     key   = splitmix64(seed ^ fnv1a64(tag))
///     state = four successive splitmix64 outputs starting from key + index
///
/// so trial t sees the same numbers no matter which thread runs it.
/// Normals use Box–Muller on two 53-bit uniforms (second variate discarded);
/// bounded integers use Lemire's nearly-divisionless rejection.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng stream(std::uint64_t seed, std::string_view tag,
                    std::uint64_t index = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, bound). `bound` must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);
  double normal();
  /// ±1 with equal probability.
  double rademacher();

  /// k distinct indices from [0, n), sorted ascending (partial Fisher–Yates).
  IndexList sample_without_replacement(Index n, Index k);

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace cohaudit
