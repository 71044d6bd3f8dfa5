#pragma once

#include <cmath>
#include <cstdint>

namespace fcar {

// Splittable random stream with a fixed, platform-independent layout:
// xoshiro256++ state seeded through SplitMix64. Streams derived from the
// same (seed, stream) pair produce identical sequences on every platform,
// which is what makes simulation and benchmark runs reproducible. The
// standard-library distributions are deliberately avoided: their output is
// implementation-defined.
class RngStream {
 public:
  // Independent stream `stream` of the family keyed by `seed`.
  static RngStream derive(std::uint64_t seed, std::uint64_t stream) {
    RngStream r;
    std::uint64_t sm = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    for (auto& word : r.state_) word = splitmix64(sm);
    // xoshiro256++ requires a nonzero state; the all-zero case is
    // astronomically unlikely but cheap to guard.
    if ((r.state_[0] | r.state_[1] | r.state_[2] | r.state_[3]) == 0)
      r.state_[0] = 0x9E3779B97F4A7C15ULL;
    return r;
  }

  // Mixes a subkey into a seed; used to give every benchmark setting its
  // own seed family so replicate streams never collide across settings.
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t subkey) {
    std::uint64_t sm = seed ^ (0xD1B54A32D192ED03ULL * (subkey + 1));
    return splitmix64(sm);
  }

  std::uint64_t next_u64() {
    std::uint64_t* s = state_;
    std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1): 53-bit mantissa, offset by half an
  // ulp so 0 and 1 are unreachable (Box-Muller needs log(u) finite).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Exactly two uniforms are consumed per
  // draw and nothing is cached, so the draw count maps one-to-one onto the
  // stream position regardless of call pattern.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  RngStream() = default;

  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
};

}  // namespace fcar
