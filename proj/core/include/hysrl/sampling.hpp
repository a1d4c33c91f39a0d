#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "hysrl/mdp.hpp"

namespace hysrl {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream); used to keep evaluation draws away
/// from the learning stream.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF draw from a normalized probability vector.
int sample_categorical(std::span<const double> probs, Rng& rng);

/// Rolls out H steps from rho. Deterministic for a fixed rng state.
EpisodeTrace sample_episode(const TabularMDP& mdp, const Policy& pi, Rng& rng,
                            long long episode = 0);

/// Sum of rewards along a trace.
double episode_return(const EpisodeTrace& trace);

}  // namespace hysrl
