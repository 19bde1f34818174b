#include "pixkit/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pixkit::attn {

static void check_rank2(const Tensor& t, const char* name) {
    if (t.rank() != 2) throw std::invalid_argument(std::string(name) + ": expected rank-2 tensor");
}

// rows of a times columns of b^T:  (n x d) * (m x d)^T -> n x m
static Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    Tensor out({a.shape[0], b.shape[0]});
    for (size_t i = 0; i < a.shape[0]; ++i) {
        for (size_t j = 0; j < b.shape[0]; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < a.shape[1]; ++k) s += a.at(i, k) * b.at(j, k);
            out.at(i, j) = s;
        }
    }
    return out;
}

static Tensor matmul(const Tensor& a, const Tensor& b) {
    Tensor out({a.shape[0], b.shape[1]});
    for (size_t i = 0; i < a.shape[0]; ++i) {
        for (size_t j = 0; j < b.shape[1]; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < a.shape[1]; ++k) s += a.at(i, k) * b.at(k, j);
            out.at(i, j) = s;
        }
    }
    return out;
}

Tensor attention_branch(const Tensor& q, const Tensor& k, const Tensor& v) {
    check_rank2(q, "attention_branch q");
    check_rank2(k, "attention_branch k");
    check_rank2(v, "attention_branch v");
    if (q.shape[1] != k.shape[1] || k.shape[0] != v.shape[0]) {
        throw std::invalid_argument("attention_branch: dimension mismatch");
    }
    if (q.shape[0] < 1 || k.shape[0] < 1) {
        throw std::invalid_argument("attention_branch: empty token set");
    }
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.shape[1]));
    Tensor logits = matmul_nt(q, k);
    Tensor weights({logits.shape[0], logits.shape[1]});
    for (size_t i = 0; i < logits.shape[0]; ++i) {
        Tensor row({logits.shape[1]});
        for (size_t j = 0; j < logits.shape[1]; ++j) row.data[j] = logits.at(i, j) * inv_sqrt_d;
        Tensor sm = softmax(row);
        for (size_t j = 0; j < logits.shape[1]; ++j) weights.at(i, j) = sm.data[j];
    }
    return matmul(weights, v);
}

static void check_inputs(const AttnInputs& in) {
    const size_t d = in.q_img.shape[1];
    if (in.k_img.shape[1] != d || in.v_img.shape[1] != d || in.k_text.shape[1] != d ||
        in.v_text.shape[1] != d || in.k_cimg.shape[1] != d || in.v_cimg.shape[1] != d) {
        throw std::invalid_argument("gated_fusion: all projections must share inner dim");
    }
    if (in.k_img.shape[0] != in.v_img.shape[0] || in.k_text.shape[0] != in.v_text.shape[0] ||
        in.k_cimg.shape[0] != in.v_cimg.shape[0]) {
        throw std::invalid_argument("gated_fusion: key/value token counts must match");
    }
}

Tensor gated_fusion(const AttnInputs& in, const GateParams& g, const anyres::RopeFreqs& freqs) {
    check_inputs(in);
    const Tensor q_roped = anyres::apply_rope_2d(in.q_img, in.positions, freqs);
    const Tensor k_roped = anyres::apply_rope_2d(in.k_img, in.positions, freqs);
    Tensor out = attention_branch(q_roped, k_roped, in.v_img);
    const double gate_text = std::tanh(g.alpha_text);
    if (gate_text != 0.0) {
        out = axpy(gate_text, attention_branch(q_roped, in.k_text, in.v_text), out);
    }
    const double gate_cimg = std::tanh(g.alpha_cond_image);
    if (gate_cimg != 0.0) {
        out = axpy(gate_cimg, attention_branch(q_roped, in.k_cimg, in.v_cimg), out);
    }
    return out;
}

std::pair<Tensor, Tensor> gated_fusion_grad_alpha(const AttnInputs& in, const GateParams& g,
                                                  const anyres::RopeFreqs& freqs) {
    check_inputs(in);
    const Tensor q_roped = anyres::apply_rope_2d(in.q_img, in.positions, freqs);
    const Tensor text_branch = attention_branch(q_roped, in.k_text, in.v_text);
    const Tensor cimg_branch = attention_branch(q_roped, in.k_cimg, in.v_cimg);
    const auto sech2 = [](double a) {
        const double c = std::cosh(a);
        return 1.0 / (c * c);
    };
    return {scale(text_branch, sech2(g.alpha_text)),
            scale(cimg_branch, sech2(g.alpha_cond_image))};
}

// ---------------------------------------------------------------------------
// token sampler
// ---------------------------------------------------------------------------

static double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

// y = gelu(x W^T + b) or plain affine; x is N x in, W is out x in
static Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b, bool activate) {
    Tensor out({x.shape[0], w.shape[0]});
    for (size_t i = 0; i < x.shape[0]; ++i) {
        for (size_t o = 0; o < w.shape[0]; ++o) {
            double s = b.data[o];
            for (size_t k = 0; k < x.shape[1]; ++k) s += x.at(i, k) * w.at(o, k);
            out.at(i, o) = activate ? gelu(s) : s;
        }
    }
    return out;
}

SamplerParams make_sampler_params(RngState& rng, int channels, int keep_k, double temperature) {
    if (channels < 2 || channels % 2 != 0) {
        throw std::invalid_argument("make_sampler_params: channels must be even and >= 2");
    }
    const size_t c = static_cast<size_t>(channels);
    const auto init = [&](std::vector<size_t> shape) {
        Tensor t(std::move(shape));
        const double bound = std::sqrt(3.0 / static_cast<double>(t.shape.back()));
        for (double& v : t.data) v = (rng.next_uniform() * 2.0 - 1.0) * bound;
        return t;
    };
    SamplerParams p;
    p.mlp1_w1 = init({c, c});
    p.mlp1_b1 = Tensor::zeros({c});
    p.mlp1_w2 = init({c, c});
    p.mlp1_b2 = Tensor::zeros({c});
    p.mlp2_w1 = init({c / 2, c});
    p.mlp2_b1 = Tensor::zeros({c / 2});
    p.mlp2_w2 = init({1, c / 2});
    p.mlp2_b2 = Tensor::zeros({1});
    p.keep_k = keep_k;
    p.temperature = temperature;
    return p;
}

Tensor score_tokens(const Tensor& x, const Tensor& task, const SamplerParams& p) {
    check_rank2(x, "score_tokens x");
    const size_t n = x.shape[0];
    const size_t c = x.shape[1];
    if (c % 2 != 0) throw std::invalid_argument("score_tokens: channel width must be even");
    if (task.numel() != c) throw std::invalid_argument("score_tokens: task embedding width mismatch");
    if (p.mlp1_w1.shape[1] != c) throw std::invalid_argument("score_tokens: sampler width mismatch");

    Tensor shifted({n, c});
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < c; ++k) shifted.at(i, k) = x.at(i, k) + task.data[k];

    Tensor z = affine(affine(shifted, p.mlp1_w1, p.mlp1_b1, true), p.mlp1_w2, p.mlp1_b2, false);

    // z' = [local half per token, global mean of the other half]
    const size_t half = c / 2;
    std::vector<double> global(half, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < half; ++k) global[k] += z.at(i, half + k);
    for (double& v : global) v /= static_cast<double>(n);

    Tensor combined({n, c});
    for (size_t i = 0; i < n; ++i) {
        for (size_t k = 0; k < half; ++k) {
            combined.at(i, k) = z.at(i, k);
            combined.at(i, half + k) = global[k];
        }
    }
    return affine(affine(combined, p.mlp2_w1, p.mlp2_b1, true), p.mlp2_w2, p.mlp2_b2, false);
}

Tensor mhgs_mask(const Tensor& scores, int k, double temperature, RngState& rng, MhgsMode mode) {
    const size_t n = scores.numel();
    if (n == 0) throw std::invalid_argument("mhgs_mask: empty scores");
    if (k < 1 || static_cast<size_t>(k) > n) {
        throw std::invalid_argument("mhgs_mask: K must satisfy 1 <= K <= N");
    }
    if (!(temperature > 0.0)) throw std::invalid_argument("mhgs_mask: temperature must be > 0");

    std::vector<double> s(n);
    for (size_t i = 0; i < n; ++i) {
        s[i] = (scores.data[i] + sample_gumbel_scalar(rng)) / temperature;
    }

    Tensor mask({n});
    if (mode == MhgsMode::hard) {
        std::vector<size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return s[a] > s[b]; });
        for (int i = 0; i < k; ++i) mask.data[idx[i]] = 1.0;
        return mask;
    }

    // softmax without replacement: K rounds, each adds its softmax over the
    // still-available entries and retires the current argmax
    std::vector<uint8_t> avail(n, 1);
    for (int round = 0; round < k; ++round) {
        double m = -std::numeric_limits<double>::infinity();
        size_t arg = 0;
        for (size_t i = 0; i < n; ++i) {
            if (avail[i] && s[i] > m) {
                m = s[i];
                arg = i;
            }
        }
        double denom = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (avail[i]) denom += std::exp(s[i] - m);
        }
        for (size_t i = 0; i < n; ++i) {
            if (avail[i]) mask.data[i] += std::exp(s[i] - m) / denom;
        }
        avail[arg] = 0;
    }
    return mask;
}

Tensor apply_token_mask(const Tensor& x, const Tensor& mask) {
    check_rank2(x, "apply_token_mask x");
    if (mask.numel() != x.shape[0]) {
        throw std::invalid_argument("apply_token_mask: mask length must equal token count");
    }
    Tensor out = x;
    for (size_t i = 0; i < x.shape[0]; ++i)
        for (size_t k = 0; k < x.shape[1]; ++k) out.at(i, k) *= mask.data[i];
    return out;
}

}  // namespace pixkit::attn
