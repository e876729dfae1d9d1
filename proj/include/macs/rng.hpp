#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace macs {

// All randomness in this project flows through the fixed generator below so
// that identical (seed, stream) pairs reproduce identical results on any
// build of this implementation. Cross-implementation bit compatibility is
// not a goal.
//
//   avalanche64  - splitmix64 finalizer (bijective 64-bit mixer)
//   mix_stream   - stream derivation; injective in i for a fixed base
//   Rng          - xoshiro256** seeded through splitmix64

constexpr std::uint64_t avalanche64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Derives sub-stream i from a base stream. For a fixed base this is injective
// in i (odd multiplier plus bijective avalanche), so the 2^64 sub-streams
// never collide.
constexpr std::uint64_t mix_stream(std::uint64_t base, std::uint64_t i) {
  return avalanche64(base + 0x9e3779b97f4a7c15ULL * (i + 1));
}

// FNV-1a, used to turn stage names ("generate", "split", ...) into stream ids.
constexpr std::uint64_t stream_id(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Identifies an independent random stream. Every stochastic operation takes
// one of these instead of a bare seed so callers can hand out disjoint
// sub-streams (per bootstrap iteration, per patient, per report row).
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

constexpr RngSpec derive(RngSpec parent, std::uint64_t i) {
  return RngSpec{parent.seed, mix_stream(parent.stream, i)};
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = avalanche64(seed ^ 0x2545f4914f6cdd1dULL) ^
                      avalanche64(stream + 0x9e3779b97f4a7c15ULL);
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      word = avalanche64(x);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }
  explicit Rng(RngSpec spec) : Rng(spec.seed, spec.stream) {}

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}, unbiased (Lemire's method with rejection).
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Inverse transform; rate > 0.
  double exponential(double rate) {
    return -std::log1p(-next_double()) / rate;
  }

  // Box-Muller; consumes two uniforms per call.
  double normal(double mean = 0.0, double sd = 1.0) {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    return mean + sd * z;
  }

  // Fisher-Yates from the back.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

}  // namespace macs
