#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace advpara {

// Stateless splitmix64 finalizer. Used for seeding and as the watermark hash.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// xoshiro256** (Blackman & Vigna), state seeded by four successive
/// splitmix64 outputs of the 64-bit seed. Streams are identical on every
/// platform; nothing here depends on <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  // Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t uniform_below(std::uint64_t bound);

  const std::array<std::uint64_t, 4>& state() const { return s_; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

// Per-task stream seed: hash of (global seed, task name, record id).
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view task,
                          std::string_view record_id = {});

}  // namespace advpara
