#pragma once

#include <cmath>
#include <cstdint>

#include "winstat/error.hpp"
#include "winstat/theory.hpp"

namespace winstat {

namespace detail {

/// SplitMix64 output mix (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based 64-bit generator: state walks a Weyl sequence and every
/// output is a finalizer of the counter, so streams derived from distinct
/// seeds are independent and a stream can be replayed from its seed alone.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  /// Uniform on the open interval (0,1): 53 random bits centered in the
  /// half-open lattice, so 0 and 1 are never returned.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Normal variate by inverse CDF; exact mean when sd == 0.
  double normal(double mean, double sd) {
    return mean + sd * theory::std_normal_quantile(uniform01());
  }

  /// Exponential variate with the given rate (> 0).
  double exponential(double rate) {
    if (!(rate > 0.0)) throw DomainError("exponential rate must be positive");
    return -std::log(uniform01()) / rate;
  }

 private:
  std::uint64_t state_;
};

/// Derives a child stream seed from a master seed and up to three stream
/// coordinates (replication, subject, ...) by chained SplitMix64 mixing.
/// Identical inputs give identical streams on every platform.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                      std::uint64_t b = 0,
                                      std::uint64_t c = 0) {
  std::uint64_t h = detail::mix64(seed ^ 0xA0761D6478BD642FULL);
  h = detail::mix64(h ^ a);
  h = detail::mix64(h ^ b);
  h = detail::mix64(h ^ c);
  return h;
}

}  // namespace winstat
