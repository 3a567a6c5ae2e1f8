#pragma once

#include <cstdint>
#include <initializer_list>

namespace sticky {

// splitmix64 finalizer; used for seeding and for deriving child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Child seed for a tuple of tags, e.g. derive_seed(master, {token_id, pair, op}).
// Stable across platforms and independent of evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t));
  return h;
}

// xorshift64* with the state initialised from mix64(seed). This exact stream
// is part of the random-insertion contract; other implementations reproduce
// it bit for bit.
class XorShift64Star {
 public:
  explicit constexpr XorShift64Star(std::uint64_t seed)
      : state_(mix64(seed) != 0 ? mix64(seed) : 0x9E3779B97F4A7C15ULL) {}

  constexpr std::uint64_t next() {
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  // Uniform in [0, bound); rejection removes modulo bias. bound must be > 0.
  constexpr std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform in [0, 1) with 53 bits.
  constexpr double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace sticky
