#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace parcel {

/// The engine used everywhere. Distributions below are hand-rolled so that
/// streams are identical across standard library implementations.
using Rng = std::mt19937_64;

/// Stage seed = mix(global seed, stage name, ordinal). Stages can be re-run in
/// isolation and still draw the same stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage, std::uint64_t ordinal = 0);

/// Uniform in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Uniform integer in [0, n). n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Standard normal via Box-Muller (one draw per call, no cached spare).
double standard_normal(Rng& rng);

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

/// Sample `count` distinct elements of [0, n) uniformly; result sorted ascending.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t count);

/// Index drawn with probability proportional to weights[i] (weights >= 0, sum > 0).
std::size_t weighted_index(Rng& rng, const std::vector<double>& cumulative);

}  // namespace parcel
