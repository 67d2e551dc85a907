// rng.hpp - counter-derived random streams.
//
// Every random draw in a run comes from a stream addressed by
// (master seed, replicate, phase, realization, sensor, purpose). The stream
// key is a 128-bit hash of that tuple, so no stream depends on how many draws
// any other stream consumed, and the result of a run is independent of the
// order in which workers execute realizations.

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bloodsim {

enum class Phase : std::uint32_t { blank = 0, present = 1, auxiliary = 2 };

enum class Purpose : std::uint32_t {
  exposure = 1,   // Poisson molecule counts
  occupancy = 2,  // interleaving, weights, binding trials
  lengths = 3,    // fragment lengths of bound molecules
  noise = 4,      // band-integrated current noise
  test = 15,
};

struct StreamPath {
  std::uint32_t replicate = 0;
  Phase phase = Phase::blank;
  std::uint32_t realization = 0;
  std::uint32_t sensor = 0;
  Purpose purpose = Purpose::exposure;
};

namespace detail {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// 128-bit key of a stream path. Two independent lanes absorb the same words
/// with different multipliers and are cross-mixed at the end.
inline std::array<std::uint64_t, 2> stream_key(std::uint64_t master_seed, const StreamPath& path) {
  const std::uint64_t words[] = {
      master_seed,
      (std::uint64_t{path.replicate} << 32) | static_cast<std::uint32_t>(path.phase),
      (std::uint64_t{path.realization} << 32) | path.sensor,
      static_cast<std::uint64_t>(path.purpose),
  };
  std::uint64_t a = 0x6a09e667f3bcc908ULL;
  std::uint64_t b = 0xbb67ae8584caa73bULL;
  for (const auto w : words) {
    a = detail::mix64(a ^ w) + 0x9e3779b97f4a7c15ULL;
    b = detail::mix64(detail::rotl(b, 23) + w * 0xd6e8feb86659fd93ULL);
  }
  return {detail::mix64(a ^ detail::rotl(b, 17)), detail::mix64(b + detail::rotl(a, 41))};
}

/// xoshiro256++ with its state expanded from a 128-bit stream key.
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, const StreamPath& path) : path_(path) {
    const auto key = stream_key(master_seed, path);
    std::uint64_t x = key[0];
    for (int i = 0; i < 4; ++i) {
      x += 0x9e3779b97f4a7c15ULL;
      state_[i] = detail::mix64(x ^ (i % 2 == 0 ? 0 : key[1]));
    }
    state_[3] ^= key[1];
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  const StreamPath& path() const { return path_; }

 private:
  std::array<std::uint64_t, 4> state_{};
  StreamPath path_;
};

inline RngStream derive_stream(std::uint64_t master_seed, const StreamPath& path) {
  return RngStream(master_seed, path);
}

}  // namespace bloodsim
