#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spikes {

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Reproducible random stream keyed by (master seed, stream index).
///
/// The engine is mt19937_64 whose output sequence is fixed by the standard;
/// the variate transforms below are written out so results do not depend on
/// the standard library's distribution implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t index)
      : seed_(seed), index_(index), engine_(mix(seed, index)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t index() const noexcept { return index_; }

  /// Independent child stream; distinct k give distinct keys.
  RngStream substream(std::uint64_t k) const {
    return RngStream(seed_, detail::splitmix64(index_ * 0x2545f4914f6cdd1dULL + k + 1));
  }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Uniform integer on {0, ..., n-1}.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (one value per call).
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
    return detail::splitmix64(detail::splitmix64(seed) ^ (index + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t seed_;
  std::uint64_t index_;
  std::mt19937_64 engine_;
};

}  // namespace spikes
