#pragma once

#include <cstdint>
#include <vector>

#include "pixkit/tensor.hpp"

namespace pixkit {

// Counter-based PRNG: draw k of stream (seed, n) is mix64(seed + GOLDEN*(n+k)),
// where mix64 is the SplitMix64 finalizer. The state is the pair of integers
// itself, so a (seed, stream) value names one fixed position in one fixed
// sequence on every platform. This generator is frozen for the lifetime of
// the repo; stored test vectors depend on it.
struct RngState {
    uint64_t seed = 0;
    uint64_t stream = 0;

    uint64_t next_u64();
    /// uniform in [0, 1), 53-bit resolution
    double next_uniform();
    /// uniform integer in [0, n)
    uint64_t next_below(uint64_t n);
};

/// i.i.d. standard normal draws (Box-Muller, cosine branch; two uniforms
/// consumed per draw so the state stays a pure counter).
Tensor sample_gaussian(RngState& rng, std::vector<size_t> shape);
double sample_gaussian_scalar(RngState& rng);

/// Gumbel(0,1) draws g = -log(-log(u)) with u clamped to
/// [1e-12, 1-1e-12], so every draw is finite.
Tensor sample_gumbel(RngState& rng, std::vector<size_t> shape);
double sample_gumbel_scalar(RngState& rng);

}  // namespace pixkit
