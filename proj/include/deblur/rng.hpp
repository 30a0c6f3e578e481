#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace deblur {

// Derives a stream-specific seed from (root seed, stream tag) via splitmix64
// over the tag's FNV-1a hash. Distinct tags give statistically independent
// streams, so adding a consumer under one tag never perturbs the others.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t x = root + 0x9e3779b97f4a7c15ull * (h | 1ull);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

// Deterministic N(0,1) sampler: mt19937_64 plus hand-rolled Box-Muller, so the
// byte stream is identical across platforms (std::normal_distribution is not).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
  NormalSampler(std::uint64_t root, std::string_view tag)
      : engine_(derive_seed(root, tag)) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // U[0,1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // U(0,1], safe as a log argument.
  double uniform_open() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace deblur
