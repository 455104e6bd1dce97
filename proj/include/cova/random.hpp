#pragma once

#include <cstdint>
#include <random>

#include "cova/numerics.hpp"

namespace cova {

using Rng = std::mt19937_64;

inline Tensor2 random_normal(std::size_t rows, std::size_t cols, Real stddev, Rng& rng) {
  std::normal_distribution<Real> dist(0.0, stddev);
  Tensor2 t(rows, cols);
  for (Real& v : t.values()) v = dist(rng);
  return t;
}

// Derives an independent stream from a base seed; keeps parameter init,
// shuffling and data generation decoupled.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace cova
