#pragma once

// Deterministic random-number plumbing: substream derivation and a uniform
// double stream that is identical across platforms and thread schedules.

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

namespace stohom {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Substream id for (master seed, realization index, stream label).
// Labels in use: "W", "Y", "Z:mn", "Phi:mn" with m,n in 1..6.
inline std::uint64_t substream_seed(std::uint64_t master_seed,
                                    std::uint64_t kappa,
                                    std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix8 = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffull;
      h *= 0x100000001b3ull;
    }
  };
  mix8(master_seed);
  mix8(kappa);
  h = fnv1a64(label, h);
  return splitmix64(h);
}

// Uniform double stream over mt19937_64. Doubles are built from the raw
// 64-bit output, not from std::uniform_real_distribution, so sequences are
// identical for every standard-conforming toolchain.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) {
    std::array<std::uint32_t, 8> words{};
    std::uint64_t s = seed;
    for (int i = 0; i < 4; ++i) {
      std::uint64_t v = splitmix64(s);
      words[2 * i] = static_cast<std::uint32_t>(v);
      words[2 * i + 1] = static_cast<std::uint32_t>(v >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  // [0, 1)
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double next_positive() { return 1.0 - next(); }

  double uniform(double a, double b) { return a + (b - a) * next(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stohom
