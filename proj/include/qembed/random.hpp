// Seeded randomness.
//
// Every random draw in the library goes through Rng (64-bit Mersenne
// Twister) and the Boost.Random distributions, whose algorithms are fixed by
// Boost rather than by the standard library vendor. Identical seeds therefore
// give identical streams on every platform.
//
// Sub-seeds are derived with derive_seed(): the parent seed and each key are
// folded through the SplitMix64 finalizer, so independent tasks (Gram entries,
// Monte-Carlo replicas, training iterations) can be seeded without sharing a
// stream and any execution order gives the same results.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "qembed/core.hpp"

namespace qembed {

using Rng = boost::random::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a, used to turn stage names into seed keys.
inline constexpr std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : tag) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                           std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = splitmix64(parent);
  for (std::uint64_t k : keys) s = splitmix64(s ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return s;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) {
  return derive_seed(parent, {hash_tag(tag)});
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform(Rng& rng, double lo, double hi) {
  return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  return boost::random::normal_distribution<double>(mean, sd)(rng);
}

inline std::int64_t uniform_index(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return boost::random::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline std::int64_t poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  return boost::random::poisson_distribution<std::int64_t, double>(mean)(rng);
}

inline std::int64_t binomial(Rng& rng, std::int64_t trials, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  return boost::random::binomial_distribution<std::int64_t, double>(trials, p)(rng);
}

/// Haar-random pure state.
inline PureQubitState random_state(Rng& rng) {
  const double a = normal(rng, 0.0, 1.0), b = normal(rng, 0.0, 1.0);
  const double c = normal(rng, 0.0, 1.0), d = normal(rng, 0.0, 1.0);
  return PureQubitState{cplx{a, b}, cplx{c, d}}.normalized();
}

/// Haar-random element of U(2) (random SU(2) times a random phase).
inline Unitary2 random_unitary(Rng& rng) {
  const double q0 = normal(rng, 0.0, 1.0), q1 = normal(rng, 0.0, 1.0);
  const double q2 = normal(rng, 0.0, 1.0), q3 = normal(rng, 0.0, 1.0);
  const double n = std::sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3);
  const cplx a{q0 / n, q1 / n}, b{q2 / n, q3 / n};
  const Unitary2 su{a, -std::conj(b), b, std::conj(a)};
  return su * std::polar(1.0, uniform(rng, -pi, pi));
}

}  // namespace qembed
