// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace erupoint {

// SplitMix64 stream. Self-contained so that every draw is bit-reproducible
// across platforms and standard-library versions; std::*_distribution makes
// no such guarantee.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n) without modulo bias.
  uint32_t uniform_u32(uint32_t n) {
    if (n == 0) return 0;
    uint64_t threshold = (~uint64_t{0}) - (~uint64_t{0}) % n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= threshold);
    return static_cast<uint32_t>(v % n);
  }

  bool coin() { return (next_u64() & 1ull) != 0; }

  // Standard normal via Box-Muller; no cached spare so draw count is obvious.
  double normal() {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // N(0, sigma) resampled until it lands inside [-bound, bound].
  double truncated_normal(double sigma, double bound) {
    for (;;) {
      double v = sigma * normal();
      if (v >= -bound && v <= bound) return v;
    }
  }

  // Deterministic derivation of sub-stream seeds.
  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

private:
  uint64_t state_;
};

} // namespace erupoint
