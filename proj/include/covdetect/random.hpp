#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "covdetect/core.hpp"

namespace covdetect {

/// SplitMix64 finalizer; used only to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the substream addressed by `path` under `seed`, e.g.
/// derive_seed(seed, {trial, hypothesis}). Distinct paths give unrelated
/// streams; the same path always gives the same stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// Source of circularly-symmetric complex normal draws CN(0, 1).
class ComplexNormalSource {
 public:
  explicit ComplexNormalSource(std::uint64_t seed) : engine_(seed) {}

  Complex operator()() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re, im};
  }

  /// Fills a rows x cols matrix with CN(0, variance) entries (column-major order).
  CMatrix matrix(Eigen::Index rows, Eigen::Index cols, double variance = 1.0) {
    CMatrix out(rows, cols);
    const double scale = std::sqrt(variance);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = scale * (*this)();
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, std::sqrt(0.5)};
};

}  // namespace covdetect
