#pragma once

#include "fpf/common.hpp"

#include <cstdint>

namespace fpf {

// Counter-based random streams. A draw is a pure function of
// (seed, stream tag, step, member, draw index), so runs are bit-reproducible
// across platforms and independent of thread scheduling or evaluation order.
// std::normal_distribution is avoided on purpose: its draw count is
// implementation-defined.

namespace rngdetail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t scramble(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t key, std::uint64_t word) {
  return scramble(key + kGolden * (word + 1));
}

}  // namespace rngdetail

enum class Stream : std::uint64_t {
  kTruth = 1,
  kFrame = 2,
  kInit = 3,
  kParticle = 4,
  kResample = 5,
};

class RngStream {
 public:
  RngStream(std::uint64_t seed, Stream stream, std::uint64_t step = 0,
            std::uint64_t member = 0) {
    using rngdetail::mix;
    state_ = mix(mix(mix(seed, static_cast<std::uint64_t>(stream)), step), member);
  }

  std::uint64_t next_u64() {
    state_ += rngdetail::kGolden;  // splitmix64 sequence from a keyed start
    return rngdetail::scramble(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec normal_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Noise function for one (seed, stream, step): member i gets its own keyed
// stream, so fn(i) does not depend on whether fn(j) was called before it.
inline NoiseFn keyed_noise(std::uint64_t seed, Stream stream, std::uint64_t step,
                           int dim) {
  return [=](int member) {
    RngStream rs(seed, stream, step, static_cast<std::uint64_t>(member));
    return rs.normal_vec(dim);
  };
}

}  // namespace fpf
