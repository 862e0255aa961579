#pragma once

#include <cstdint>
#include <random>

namespace martlab {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of replicate `index` under `master_seed`. Streams are derived by
/// hashing, never by advancing a shared generator, so any replicate can be
/// produced independently of the others.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return mix64(master_seed ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// A (master seed, replicate index) pair naming one random stream.
struct Stream {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate = 0;

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept {
    return derive_stream_seed(master_seed, replicate);
  }
  [[nodiscard]] Engine engine() const { return Engine(seed()); }
};

/// Sub-stream for a purpose tag inside a stream (e.g. futures vs. pasts).
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(seed + mix64(tag ^ 0xd1b54a32d192ed03ULL));
}

}  // namespace martlab
