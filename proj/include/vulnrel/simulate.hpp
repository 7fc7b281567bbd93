#pragma once

// Seeded generators for synthetic autologistic series.

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "vulnrel/autologistic.hpp"

namespace vulnrel {

/// Uniform draw in [0, 1) from the top 53 bits, identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Draws a series of `length` values from the autologistic model with
/// coefficients beta (beta[0] constant, beta[j] on lag j). The first
/// `burn_in` draws are discarded; the initial lags are fair coin flips.
inline Bits simulate_autologistic(std::span<const double> beta, std::size_t length, std::uint64_t seed,
                                  std::size_t burn_in = 100) {
  if (beta.empty()) throw std::invalid_argument("beta must hold at least the constant");
  const std::size_t order = beta.size() - 1;
  std::mt19937_64 rng(seed);
  Bits w;
  w.reserve(order + burn_in + length);
  for (std::size_t i = 0; i < order; ++i) w.push_back(unit_uniform(rng) < 0.5 ? 1 : 0);
  std::vector<std::uint8_t> lags(order);
  while (w.size() < order + burn_in + length) {
    for (std::size_t j = 0; j < order; ++j) lags[j] = w[w.size() - 1 - j];
    w.push_back(unit_uniform(rng) < predict(beta, lags) ? 1 : 0);
  }
  return Bits(w.end() - static_cast<std::ptrdiff_t>(length), w.end());
}

}  // namespace vulnrel
