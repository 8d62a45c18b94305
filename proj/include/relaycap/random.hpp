// Seeded randomness helpers. Everything here is bit-reproducible across
// platforms: mt19937_64 output is pinned by the standard and all draws go
// through explicit integer-to-double conversions.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace relaycap::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (master, stream, index).
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s) ^ (stream * 0xD1B54A32D192ED03ull);
  std::uint64_t b = a;
  std::uint64_t c = splitmix64(b) ^ (index * 0x8CB92BA72F3D8DD7ull);
  return splitmix64(c);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform index in [0, 2^bits).
  std::uint64_t index_pow2(unsigned bits) {
    if (bits == 0) return 0;
    return eng_() >> (64 - bits);
  }

  // Inverse-CDF draw from a categorical distribution (mass ~ 1).
  std::size_t categorical(std::span<const double> probs) {
    const double u = unit();
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      cum += probs[k];
      if (u < cum) return k;
    }
    return probs.size() - 1;
  }

  // Uniform draw from the probability simplex (normalized exponentials,
  // i.e. a flat Dirichlet).
  std::vector<double> simplex_point(std::size_t k) {
    if (k == 0) throw std::invalid_argument("simplex_point: k must be positive");
    std::vector<double> g(k);
    double sum = 0.0;
    for (auto& v : g) {
      v = -std::log(1.0 - unit());
      sum += v;
    }
    for (auto& v : g) v /= sum;
    return g;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace relaycap::detail
