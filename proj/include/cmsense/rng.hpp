#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace cmsense {

// Splittable counter-style PRNG built on the splitmix64 finalizer.
// A generator can be forked into independent substreams by label or by
// index; forking does not disturb the parent, so the draw sequence of any
// (seed, stream path) pair is reproducible regardless of the order in
// which sibling streams are consumed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::string_view stream = {})
      : state_(mix(seed ^ kSeedSalt)) {
    if (!stream.empty()) state_ = derive_label(state_, stream);
  }

  // Fork an independent substream identified by a short label.
  [[nodiscard]] SeededRng stream(std::string_view label) const {
    return SeededRng(derive_label(state_, label), RawTag{});
  }

  // Fork an independent substream identified by an index.
  [[nodiscard]] SeededRng at(std::uint64_t index) const {
    return SeededRng(mix(state_ ^ (kIndexSalt + index * kGamma)), RawTag{});
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_index: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller (two uniform draws per call, no caching).
  double gauss() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Circularly symmetric complex normal with E|z|^2 = variance.
  std::complex<double> cgauss(double variance) {
    if (!(variance >= 0.0)) throw std::invalid_argument("cgauss: variance must be nonnegative");
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-variance * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  // k distinct indices drawn uniformly from {0, ..., n-1} (selection order).
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k < 0 || n < 0 || k > n)
      throw std::invalid_argument("sample_without_replacement: need 0 <= k <= n");
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int t = 0; t < k; ++t) {
      const auto j = t + static_cast<int>(uniform_index(static_cast<std::uint64_t>(n - t)));
      std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
  }

 private:
  struct RawTag {};
  SeededRng(std::uint64_t raw_state, RawTag) : state_(raw_state) {}

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x5851F42D4C957F2DULL;
  static constexpr std::uint64_t kIndexSalt = 0x14057B7EF767814FULL;
  static constexpr std::uint64_t kLabelSalt = 0x2545F4914F6CDD1DULL;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t derive_label(std::uint64_t state, std::string_view label) {
    // FNV-1a over the label, mixed into the parent state.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ULL;
    }
    return mix(state ^ kLabelSalt ^ h);
  }

  std::uint64_t state_;
};

}  // namespace cmsense
