#ifndef PAIRLAB_RNG_HPP_
#define PAIRLAB_RNG_HPP_

#include <array>
#include <cstdint>
#include <string_view>

// Deterministic random number generation.
//
// Every random quantity in the library is a pure function of a single 64-bit
// root seed. Sub-streams (per prompt, per Monte Carlo trial, per trainer run)
// are derived with derive_seed(), so work can be partitioned across threads
// without changing results. Normal deviates use the inverse-CDF method
// (Wichura's AS241 PPND16 rational approximation, full double precision);
// golden files depend on this exact method, do not swap it for
// std::normal_distribution, whose output is implementation-defined.

namespace pairlab {

// SplitMix64 output scrambler (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64_scramble(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// SplitMix64 stream: state advances by the golden-ratio increment.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_scramble(state_);
  }

 private:
  std::uint64_t state_;
};

// FNV-1a 64-bit hash, used to turn string identifiers into stream keys.
constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Canonical sub-stream derivation: mixes a root seed with a stream key.
// Both inputs pass through the SplitMix64 finalizer so that low-entropy
// keys (small integers, sequential ids) land far apart.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t key) {
  return splitmix64_scramble(splitmix64_scramble(root + 0x9E3779B97F4A7C15ULL) ^
                             splitmix64_scramble(key + 0xD1B54A32D192ED03ULL));
}

// xoshiro256++ (Blackman & Vigna 2019), seeded through SplitMix64.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : state_) word = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in the open interval (0, 1): 53-bit mantissa, offset by half a
  // step so 0 and 1 are unreachable (the inverse normal CDF needs that).
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  double normal(double mu, double sigma) {
    return mu + sigma * inverse_normal_cdf(uniform01());
  }

  static double inverse_normal_cdf(double p);

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
};

}  // namespace pairlab

#endif  // PAIRLAB_RNG_HPP_
