#pragma once

#include <cstdint>

#include "promprune/selection.hpp"
#include "promprune/tensor_core.hpp"

namespace promprune {

struct SyntheticSample {
  TokenMatrix tokens;
  SaliencyVector saliency;
};

/// Rows are convex mixtures of `k_directions` orthonormal directions plus
/// isotropic Gaussian noise of standard deviation `noise` per entry. Row i is
/// anchored on direction (i mod k), so the directions carry equal energy when
/// k divides n. Saliency is |<row, direction 0>| plus |noise|.
SyntheticSample synth_tokens(Index n, Index d, Index k_directions, double noise,
                             std::uint64_t seed);

/// SplitMix64 step; used to derive per-trial seeds from a single seed.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace promprune
