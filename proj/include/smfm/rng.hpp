#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace smfm {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derive the seed of a named sub-stream from a master seed. Distinct names
/// (and distinct indices under the same name) give independent streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0) noexcept;

/// Every random draw in a training run comes from one of these streams.
struct SeedStreams {
  std::uint64_t split = 0;
  std::uint64_t negatives = 0;
  std::uint64_t mixing = 0;
  std::uint64_t init = 0;
  std::uint64_t shuffle = 0;

  static SeedStreams from_master(std::uint64_t master) noexcept;
};

/// Uniform index in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace smfm
