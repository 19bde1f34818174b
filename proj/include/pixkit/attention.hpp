#pragma once

#include <utility>
#include <vector>

#include "pixkit/anyres.hpp"
#include "pixkit/rng.hpp"
#include "pixkit/tensor.hpp"

namespace pixkit::attn {

// Zero-initialized gates for the two conditional attention branches. At
// initialization the fused output is exactly plain self-attention; the
// conditional branches fade in as the gates train away from zero.
struct GateParams {
    double alpha_text = 0.0;
    double alpha_cond_image = 0.0;
};

// single-head projections; multi-head is a loop over head slices
struct AttnInputs {
    Tensor q_img, k_img, v_img;     // target-image tokens, N_i x d
    Tensor k_text, v_text;          // text-instruction tokens, N_t x d
    Tensor k_cimg, v_cimg;          // conditional-image tokens, N_c x d
    std::vector<std::pair<int, int>> positions;  // (row, col) per image token, for RoPE
};

/// one attention branch: softmax(Q K^T / sqrt(d)) V, row-wise softmax
Tensor attention_branch(const Tensor& q, const Tensor& k, const Tensor& v);

/// Tri-source fused attention:
///   softmax(Q~ K~^T/sqrt(d)) V_i
///     + tanh(alpha_text) * softmax(Q~ K_t^T/sqrt(d)) V_t
///     + tanh(alpha_ci)   * softmax(Q~ K_ci^T/sqrt(d)) V_ci
/// RoPE is applied to the image queries and keys only (Q~, K~); a branch
/// whose gate is exactly zero is skipped, so at zero init the result is
/// bit-identical to the self branch.
Tensor gated_fusion(const AttnInputs& in, const GateParams& g, const anyres::RopeFreqs& freqs);

/// analytic gate gradients: dA/d(alpha) = sech^2(alpha) * (branch output)
std::pair<Tensor, Tensor> gated_fusion_grad_alpha(const AttnInputs& in, const GateParams& g,
                                                  const anyres::RopeFreqs& freqs);

// ---------------------------------------------------------------------------
// task-aware dynamic token sampler
// ---------------------------------------------------------------------------

// Ranking network: two affine layers C->C (mlp1), then local/global feature
// split and two affine layers C->C/2->1 (mlp2). Four linear layers total.
struct SamplerParams {
    Tensor mlp1_w1, mlp1_b1;  // C x C, C
    Tensor mlp1_w2, mlp1_b2;  // C x C, C
    Tensor mlp2_w1, mlp2_b1;  // C/2 x C, C/2
    Tensor mlp2_w2, mlp2_b2;  // 1 x C/2, 1
    int keep_k = 1;
    double temperature = 1.0;
};

/// random small-weight sampler for the given channel width
SamplerParams make_sampler_params(RngState& rng, int channels, int keep_k, double temperature);

/// Token importance scores: z = mlp1(x + task), split into per-token local
/// half and token-averaged global half, concat back to N x C, then
/// M = mlp2(z'). Permutation-equivariant over tokens. C must be even.
Tensor score_tokens(const Tensor& x, const Tensor& task, const SamplerParams& p);

enum class MhgsMode { hard, relaxed };

/// Multi-hot Gumbel top-K over perturbed scores s = (M + gumbel)/temperature.
/// hard: the K-hot indicator of the top-K of s (exactly K ones).
/// relaxed: K rounds of softmax-without-replacement (each round's softmax is
/// added to the weights, then its argmax is suppressed); weights sum to K and
/// sharpen to the hard mask as temperature -> 0. The hard mask equals the
/// straight-through rounding of the relaxed weights: both select the same
/// top-K set of s.
Tensor mhgs_mask(const Tensor& scores, int k, double temperature, RngState& rng, MhgsMode mode);

/// row-wise Hadamard scaling; hard masks zero out the dropped tokens
Tensor apply_token_mask(const Tensor& x, const Tensor& mask);

}  // namespace pixkit::attn
