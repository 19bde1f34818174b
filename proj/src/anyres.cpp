#include "pixkit/anyres.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace pixkit::anyres {

static double rel_area_error(const PartitionCandidate& c, long long target) {
    return std::abs(static_cast<double>(c.pixel_area() - target)) / static_cast<double>(target);
}

std::vector<PartitionCandidate> candidate_set(const std::vector<long long>& center_areas,
                                              int patch_px,
                                              const std::vector<double>& aspect_ratios) {
    if (center_areas.empty()) throw std::invalid_argument("candidate_set: no centers");
    if (patch_px < 1) throw std::invalid_argument("candidate_set: patch_px must be >= 1");
    std::vector<PartitionCandidate> out;
    for (long long area : center_areas) {
        if (area < 1) throw std::invalid_argument("candidate_set: non-positive center area");
        for (double r : aspect_ratios) {
            if (!(r > 0.0)) throw std::invalid_argument("candidate_set: non-positive ratio");
            const int th = std::max(
                1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(area) / r) / patch_px)));
            const int tw = std::max(1, static_cast<int>(std::lround(r * th)));
            PartitionCandidate best{tw, th, patch_px};
            if (rel_area_error(best, area) > 0.15) {
                // nudge one token in either dimension toward the target area
                for (int dh = -1; dh <= 1; ++dh) {
                    for (int dw = -1; dw <= 1; ++dw) {
                        PartitionCandidate c{std::max(1, tw + dw), std::max(1, th + dh), patch_px};
                        if (rel_area_error(c, area) < rel_area_error(best, area)) best = c;
                    }
                }
            }
            if (rel_area_error(best, area) <= 0.15) out.push_back(best);
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.tokens_w, a.tokens_h, a.patch_px) <
               std::tie(b.tokens_w, b.tokens_h, b.patch_px);
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty()) throw std::runtime_error("candidate_set: no candidate within area tolerance");
    return out;
}

std::vector<PartitionCandidate> default_candidates() {
    const std::vector<long long> centers = {512LL * 512, 768LL * 768, 1024LL * 1024};
    const std::vector<double> ratios = {0.25,      1.0 / 3.0, 0.5, 0.75, 1.0,
                                        4.0 / 3.0, 1.5,       2.0, 4.0};
    return candidate_set(centers, 16, ratios);
}

const PartitionCandidate& select_partition(int w, int h,
                                           const std::vector<PartitionCandidate>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("select_partition: no candidates");
    if (w < 1 || h < 1) throw std::invalid_argument("select_partition: bad image size");
    const double img_ratio = static_cast<double>(w) / h;
    const long long img_area = 1LL * w * h;
    const PartitionCandidate* best = nullptr;
    double best_mismatch = 0.0;
    for (const auto& c : candidates) {
        const double mismatch = std::abs(std::log(img_ratio / c.ratio()));
        if (!best) {
            best = &c;
            best_mismatch = mismatch;
            continue;
        }
        if (mismatch < best_mismatch) {
            best = &c;
            best_mismatch = mismatch;
        } else if (mismatch == best_mismatch) {
            const long long da = std::abs(c.pixel_area() - img_area);
            const long long db = std::abs(best->pixel_area() - img_area);
            if (da < db || (da == db && c.token_count() < best->token_count())) {
                best = &c;
            }
        }
    }
    return *best;
}

PadGrid pad_and_grid(int w, int h, const PartitionCandidate& cand) {
    if (w < 1 || h < 1) throw std::invalid_argument("pad_and_grid: bad image size");
    const int box_w = cand.tokens_w * cand.patch_px;
    const int box_h = cand.tokens_h * cand.patch_px;
    const double s = std::min(static_cast<double>(box_w) / w, static_cast<double>(box_h) / h);
    PadGrid g;
    g.scaled_w = std::min(box_w, std::max(1, static_cast<int>(std::lround(w * s))));
    g.scaled_h = std::min(box_h, std::max(1, static_cast<int>(std::lround(h * s))));
    g.tokens_w = cand.tokens_w;
    g.tokens_h = cand.tokens_h;
    g.padded.assign(static_cast<size_t>(cand.tokens_w) * cand.tokens_h, 0);
    const int x_off = (box_w - g.scaled_w) / 2;
    const int y_off = (box_h - g.scaled_h) / 2;
    size_t n_pad = 0;
    for (int ty = 0; ty < cand.tokens_h; ++ty) {
        for (int tx = 0; tx < cand.tokens_w; ++tx) {
            // cell [tx*p, tx*p+p) x [ty*p, ty*p+p) vs image extent
            const bool overlaps_x = tx * cand.patch_px < x_off + g.scaled_w &&
                                    (tx + 1) * cand.patch_px > x_off;
            const bool overlaps_y = ty * cand.patch_px < y_off + g.scaled_h &&
                                    (ty + 1) * cand.patch_px > y_off;
            if (!(overlaps_x && overlaps_y)) {
                g.padded[static_cast<size_t>(ty) * cand.tokens_w + tx] = 1;
                ++n_pad;
            }
        }
    }
    g.pad_fraction = static_cast<double>(n_pad) / static_cast<double>(g.padded.size());
    return g;
}

static void shuffle_indices(std::vector<size_t>& idx, RngState& rng) {
    for (size_t i = idx.size(); i > 1; --i) {
        std::swap(idx[i - 1], idx[rng.next_below(i)]);
    }
}

BucketPlan bucket_batches(const std::vector<Item>& items,
                          const std::vector<PartitionCandidate>& candidates, int batch_size,
                          RngState& rng) {
    if (batch_size < 1) throw std::invalid_argument("bucket_batches: batch_size must be >= 1");
    BucketPlan plan;
    plan.batch_size = batch_size;
    std::map<std::tuple<int, int, int>, size_t> bucket_of;
    std::vector<std::vector<size_t>> members;  // item indices per bucket
    for (size_t i = 0; i < items.size(); ++i) {
        const PartitionCandidate& c = select_partition(items[i].w, items[i].h, candidates);
        const auto key = std::make_tuple(c.tokens_w, c.tokens_h, c.patch_px);
        auto [it, fresh] = bucket_of.try_emplace(key, plan.buckets.size());
        if (fresh) {
            plan.buckets.push_back(Bucket{c, {}});
            members.push_back({});
        }
        members[it->second].push_back(i);
    }
    size_t padded = 0, total = 0;
    for (size_t b = 0; b < plan.buckets.size(); ++b) {
        shuffle_indices(members[b], rng);
        for (size_t i : members[b]) {
            plan.buckets[b].member_ids.push_back(items[i].id);
            const PadGrid g = pad_and_grid(items[i].w, items[i].h, plan.buckets[b].candidate);
            padded += std::count(g.padded.begin(), g.padded.end(), uint8_t{1});
            total += g.padded.size();
        }
    }
    plan.padding_waste = total ? static_cast<double>(padded) / static_cast<double>(total) : 0.0;
    return plan;
}

double random_batching_waste(const std::vector<Item>& items,
                             const std::vector<PartitionCandidate>& candidates, int batch_size,
                             RngState& rng) {
    if (batch_size < 1) throw std::invalid_argument("random_batching_waste: batch_size must be >= 1");
    if (items.empty()) return 0.0;
    std::vector<size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_indices(order, rng);
    size_t padded = 0, total = 0;
    for (size_t start = 0; start < order.size(); start += batch_size) {
        const size_t end = std::min(order.size(), start + batch_size);
        size_t best_pad = 0, best_total = 0;
        bool have = false;
        for (const auto& c : candidates) {
            size_t pad = 0, tot = 0;
            for (size_t k = start; k < end; ++k) {
                const PadGrid g = pad_and_grid(items[order[k]].w, items[order[k]].h, c);
                pad += std::count(g.padded.begin(), g.padded.end(), uint8_t{1});
                tot += g.padded.size();
            }
            if (!have || pad * best_total < best_pad * tot ||
                (pad * best_total == best_pad * tot && tot < best_total)) {
                best_pad = pad;
                best_total = tot;
                have = true;
            }
        }
        padded += best_pad;
        total += best_total;
    }
    return total ? static_cast<double>(padded) / static_cast<double>(total) : 0.0;
}

RopeFreqs ntk_rope_freqs(int head_dim, double base, double scale) {
    if (head_dim < 2 || head_dim % 2 != 0) {
        throw std::invalid_argument("ntk_rope_freqs: head_dim must be even and >= 2");
    }
    if (!(base > 1.0)) throw std::invalid_argument("ntk_rope_freqs: base must be > 1");
    if (!(scale >= 1.0)) throw std::invalid_argument("ntk_rope_freqs: scale must be >= 1");
    RopeFreqs f;
    f.head_dim = head_dim;
    f.base = base;
    f.scale = scale;
    const double adjusted =
        base * std::pow(scale, static_cast<double>(head_dim) / (head_dim - 2));
    f.freqs.resize(head_dim / 2);
    for (int j = 0; j < head_dim / 2; ++j) {
        f.freqs[j] = std::pow(adjusted, -2.0 * j / head_dim);
    }
    return f;
}

Tensor apply_rope_2d(const Tensor& x, const std::vector<std::pair<int, int>>& positions,
                     const RopeFreqs& freqs) {
    if (x.rank() != 2) throw std::invalid_argument("apply_rope_2d: expected rank-2 tokens x dim");
    const size_t n_tokens = x.shape[0];
    const size_t dim = x.shape[1];
    if (dim != static_cast<size_t>(freqs.head_dim) || dim % 4 != 0) {
        throw std::invalid_argument("apply_rope_2d: head_dim must match freqs and be divisible by 4");
    }
    if (positions.size() != n_tokens) {
        throw std::invalid_argument("apply_rope_2d: one (row,col) position per token required");
    }
    Tensor out = x;
    for (size_t t = 0; t < n_tokens; ++t) {
        for (size_t j = 0; j < dim / 2; ++j) {
            const double pos =
                (j % 2 == 0) ? static_cast<double>(positions[t].first)   // rows on even slots
                             : static_cast<double>(positions[t].second); // cols on odd slots
            const double angle = pos * freqs.freqs[j];
            const double c = std::cos(angle), s = std::sin(angle);
            const double a = x.at(t, 2 * j);
            const double b = x.at(t, 2 * j + 1);
            out.at(t, 2 * j) = a * c - b * s;
            out.at(t, 2 * j + 1) = a * s + b * c;
        }
    }
    return out;
}

}  // namespace pixkit::anyres
