#pragma once

#include <cstdint>

// Deterministic, counter-indexed random stream. Every draw is a pure
// function of (seed, counter), so shards of a stream can be produced on
// any worker in any order and still concatenate to the single-lane
// sequence. The generator is SplitMix64 (Steele, Lea & Flood), evaluated
// in counter form; Gaussian variates come from the uniform stream through
// the AS241 inverse normal CDF rather than rejection, so the mapping from
// counters to variates is one-to-one.

namespace gw::rng {

// Weyl increment and finalizer constants of SplitMix64.
inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// The k-th 64-bit word of the stream for this seed.
std::uint64_t word_at(std::uint64_t seed, std::uint64_t counter);

// Uniform on the open interval (0, 1): the top 53 bits of the word,
// offset by half a lattice step so 0 and 1 are unreachable.
double uniform_at(std::uint64_t seed, std::uint64_t counter);

// Standard normal via the inverse CDF applied to uniform_at.
double normal_at(std::uint64_t seed, std::uint64_t counter);

// Inverse standard normal CDF (Wichura's algorithm AS241, PPND16).
// Accurate to about 1e-15 over (0, 1).
double normal_icdf(double p);

// Mixes a label into a seed to derive independent substreams (used to
// give optimizer restarts and design-grid nodes their own streams).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label);

}  // namespace gw::rng
