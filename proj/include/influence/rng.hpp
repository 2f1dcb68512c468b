#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "influence/errors.hpp"

namespace influence {

// splitmix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the stream identified by (a, b) under a master seed. Streams with
// distinct identifiers are statistically independent.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return mix64(mix64(master ^ mix64(a)) ^ mix64(b ^ 0x5851f42d4c957f2dULL));
}

// Seeded random source with the samplers the project needs. Every draw is
// built from uniform() so sequences depend only on the seed, not on the
// standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // open interval (0, 1); never returns an endpoint, so logs are safe
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [lo, hi] inclusive
  long uniform_int(long lo, long hi) {
    long span = hi - lo + 1;
    long k = static_cast<long>(uniform() * static_cast<double>(span));
    if (k >= span) k = span - 1;
    return lo + k;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; the sine branch is discarded so every call costs exactly
  // two uniforms
  double normal(double mean = 0.0, double sd = 1.0) {
    double r = std::sqrt(-2.0 * std::log(uniform()));
    double a = 2.0 * M_PI * uniform();
    return mean + sd * r * std::cos(a);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Marsaglia-Tsang; shape < 1 handled with the power boost
  double gamma(double shape, double scale) {
    if (shape <= 0.0 || scale <= 0.0)
      throw internal_error("gamma: shape and scale must be positive");
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
        return d * v * scale;
    }
  }

  double beta(double a, double b) {
    if (a <= 0.0 || b <= 0.0)
      throw internal_error("beta: shapes must be positive");
    if (b == 1.0) return std::pow(uniform(), 1.0 / a);  // inverse-CDF shortcut
    if (a == 1.0) return 1.0 - std::pow(uniform(), 1.0 / b);
    double x = gamma(a, 1.0);
    double y = gamma(b, 1.0);
    return x / (x + y);
  }

  // index drawn proportionally to weights; total must be their sum
  std::size_t categorical(const std::vector<double>& weights, double total) {
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      acc += weights[k];
      if (u < acc) return k;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace influence
