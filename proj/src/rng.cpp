#include "pixkit/rng.hpp"

#include <cmath>

namespace pixkit {

static constexpr uint64_t GOLDEN = 0x9e3779b97f4a7c15ULL;

static uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t RngState::next_u64() {
    stream += 1;
    return mix64(seed + GOLDEN * stream);
}

double RngState::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t RngState::next_below(uint64_t n) {
    // 53-bit multiply-shift; bias is negligible for the small n used here
    return static_cast<uint64_t>(next_uniform() * static_cast<double>(n)) % n;
}

double sample_gaussian_scalar(RngState& rng) {
    // open-interval u1 so log() stays finite
    const double u1 = 1.0 - rng.next_uniform();
    const double u2 = rng.next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Tensor sample_gaussian(RngState& rng, std::vector<size_t> shape) {
    Tensor t(std::move(shape));
    for (double& v : t.data) v = sample_gaussian_scalar(rng);
    return t;
}

double sample_gumbel_scalar(RngState& rng) {
    double u = rng.next_uniform();
    if (u < 1e-12) u = 1e-12;
    if (u > 1.0 - 1e-12) u = 1.0 - 1e-12;
    return -std::log(-std::log(u));
}

Tensor sample_gumbel(RngState& rng, std::vector<size_t> shape) {
    Tensor t(std::move(shape));
    for (double& v : t.data) v = sample_gumbel_scalar(rng);
    return t;
}

}  // namespace pixkit
