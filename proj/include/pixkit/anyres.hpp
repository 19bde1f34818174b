#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pixkit/rng.hpp"
#include "pixkit/tensor.hpp"

namespace pixkit::anyres {

// one token-grid layout; implied pixel box is tokens_w*patch_px by
// tokens_h*patch_px
struct PartitionCandidate {
    int tokens_w = 1;
    int tokens_h = 1;
    int patch_px = 16;

    long long pixel_area() const {
        return 1LL * tokens_w * tokens_h * patch_px * patch_px;
    }
    double ratio() const { return static_cast<double>(tokens_w) / tokens_h; }
    int token_count() const { return tokens_w * tokens_h; }
    bool operator==(const PartitionCandidate&) const = default;
};

/// Candidate partitions around the given pixel-area centers: for each
/// (center A, ratio r), tokens_h = round(sqrt(A/r)/patch_px) and
/// tokens_w = round(r*tokens_h), nudged by at most one token per side so the
/// implied area stays within 15% of A. Duplicates removed; an empty result
/// is an error.
std::vector<PartitionCandidate> candidate_set(const std::vector<long long>& center_areas,
                                              int patch_px,
                                              const std::vector<double>& aspect_ratios);

/// centers 512^2 / 768^2 / 1024^2, patch 16, ratios
/// {1/4, 1/3, 1/2, 3/4, 1, 4/3, 3/2, 2, 4}
std::vector<PartitionCandidate> default_candidates();

/// Closest-aspect candidate: argmin |log((w/h)/(tokens_w/tokens_h))|, ties
/// broken by |pixel area - w*h|, then by fewer tokens. Never fails on
/// non-empty candidate lists.
const PartitionCandidate& select_partition(int w, int h,
                                           const std::vector<PartitionCandidate>& candidates);

struct PadGrid {
    int scaled_w = 0;   // image size after aspect-preserving fit into the box
    int scaled_h = 0;
    int tokens_w = 0;
    int tokens_h = 0;
    std::vector<uint8_t> padded;  // tokens_h*tokens_w, 1 = cell holds no image pixels
    double pad_fraction = 0.0;

    bool token_padded(int ty, int tx) const {
        return padded[static_cast<size_t>(ty) * tokens_w + tx] != 0;
    }
};

/// Scales the image (aspect preserved, up or down, never beyond the box),
/// centers it in the candidate's pixel box, and marks the token cells that
/// contain no image pixels.
PadGrid pad_and_grid(int w, int h, const PartitionCandidate& cand);

struct Item {
    std::string id;
    int w = 0;
    int h = 0;
};

struct Bucket {
    PartitionCandidate candidate;
    std::vector<std::string> member_ids;
};

struct BucketPlan {
    std::vector<Bucket> buckets;
    int batch_size = 1;
    double padding_waste = 0.0;  // padded-token fraction over all items
};

/// Groups items by their select_partition candidate; members are shuffled
/// deterministically (batches are consecutive batch_size chunks of each
/// bucket, partial tails kept).
BucketPlan bucket_batches(const std::vector<Item>& items,
                          const std::vector<PartitionCandidate>& candidates, int batch_size,
                          RngState& rng);

/// Baseline for comparison: shuffle everything, batch consecutively, give
/// every batch its padding-minimizing candidate, and account padded tokens
/// the same way bucket_batches does.
double random_batching_waste(const std::vector<Item>& items,
                             const std::vector<PartitionCandidate>& candidates, int batch_size,
                             RngState& rng);

// ---------------------------------------------------------------------------
// rotary position embeddings
// ---------------------------------------------------------------------------

struct RopeFreqs {
    int head_dim = 0;
    double base = 10000.0;
    double scale = 1.0;
    std::vector<double> freqs;  // head_dim/2, strictly decreasing
};

/// Standard RoPE frequencies with the NTK-adjusted base
/// base' = base * scale^(dim/(dim-2)):  freqs[j] = base'^(-2j/dim).
/// scale = 1 reproduces unscaled RoPE exactly.
RopeFreqs ntk_rope_freqs(int head_dim, double base, double scale);

/// 2D rotary embedding over rank-2 input (tokens x head_dim). Adjacent value
/// pairs rotate by pos*freq; even pair slots take the row coordinate, odd
/// slots the column, so both axes cover the full frequency range. head_dim
/// must be divisible by 4.
Tensor apply_rope_2d(const Tensor& x, const std::vector<std::pair<int, int>>& positions,
                     const RopeFreqs& freqs);

}  // namespace pixkit::anyres
