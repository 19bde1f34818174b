#include <doctest.h>

#include <cmath>
#include <set>

#include "pixkit/anyres.hpp"
#include "pixkit/rng.hpp"

using namespace pixkit;
using namespace pixkit::anyres;

TEST_SUITE_BEGIN("anyres");

TEST_CASE("candidate_set: square 512 center gives the exact 32x32 grid") {
    const auto cands = candidate_set({512LL * 512}, 16, {1.0});
    REQUIRE(cands.size() == 1);
    CHECK(cands[0] == PartitionCandidate{32, 32, 16});
    CHECK(cands[0].pixel_area() == 512LL * 512);
}

TEST_CASE("candidate_set: ratio 2 at 512^2 stays within the area bound") {
    const auto cands = candidate_set({512LL * 512}, 16, {2.0});
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].tokens_h == 23);
    CHECK((cands[0].tokens_w == 45 || cands[0].tokens_w == 46));
    const double err = std::abs(double(cands[0].pixel_area() - 512LL * 512)) / (512.0 * 512.0);
    CHECK(err <= 0.15);
}

TEST_CASE("candidate_set: default grid dedups to at most 27") {
    const auto cands = default_candidates();
    CHECK(cands.size() <= 27);
    CHECK(cands.size() >= 20);
    std::set<std::tuple<int, int, int>> seen;
    for (const auto& c : cands) {
        CHECK(seen.insert({c.tokens_w, c.tokens_h, c.patch_px}).second);
        const double rel = std::min({std::abs(double(c.pixel_area()) - 512.0 * 512) / (512.0 * 512),
                                     std::abs(double(c.pixel_area()) - 768.0 * 768) / (768.0 * 768),
                                     std::abs(double(c.pixel_area()) - 1024.0 * 1024) / (1024.0 * 1024)});
        CHECK(rel <= 0.15);
    }
    CHECK_THROWS(candidate_set({}, 16, {1.0}));
}

TEST_CASE("select_partition: exact square match and degenerate strip") {
    const auto cands = default_candidates();
    const PartitionCandidate& sq = select_partition(512, 512, cands);
    CHECK(sq == PartitionCandidate{32, 32, 16});
    // extreme ratio never errors, lands on the widest/tallest candidate
    const PartitionCandidate& strip = select_partition(1, 1000, cands);
    CHECK(strip.ratio() == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("select_partition: equals brute-force argmin on 1000 random sizes") {
    const auto cands = default_candidates();
    RngState rng{99, 0};
    for (int i = 0; i < 1000; ++i) {
        const int w = 1 + static_cast<int>(rng.next_below(2048));
        const int h = 1 + static_cast<int>(rng.next_below(2048));
        const PartitionCandidate& got = select_partition(w, h, cands);
        // independent argmin with the documented tie rules
        const PartitionCandidate* best = nullptr;
        for (const auto& c : cands) {
            if (!best) { best = &c; continue; }
            const double mc = std::abs(std::log((double(w) / h) / c.ratio()));
            const double mb = std::abs(std::log((double(w) / h) / best->ratio()));
            if (mc < mb) { best = &c; continue; }
            if (mc > mb) continue;
            const long long dc = std::llabs(c.pixel_area() - 1LL * w * h);
            const long long db = std::llabs(best->pixel_area() - 1LL * w * h);
            if (dc < db || (dc == db && c.token_count() < best->token_count())) best = &c;
        }
        CHECK(got == *best);
    }
}

TEST_CASE("pad_and_grid: exact fit has zero padding") {
    const PadGrid g = pad_and_grid(512, 512, {32, 32, 16});
    CHECK(g.pad_fraction == 0.0);
    CHECK(g.scaled_w == 512);
    CHECK(g.scaled_h == 512);
}

TEST_CASE("pad_and_grid: 512x256 into the square grid pads 16 full rows") {
    const PadGrid g = pad_and_grid(512, 256, {32, 32, 16});
    CHECK(g.scaled_w == 512);
    CHECK(g.scaled_h == 256);
    CHECK(g.pad_fraction == doctest::Approx(0.5).epsilon(1e-12));
    int padded_rows = 0;
    for (int ty = 0; ty < 32; ++ty) {
        bool all = true;
        for (int tx = 0; tx < 32; ++tx) all = all && g.token_padded(ty, tx);
        padded_rows += all;
    }
    CHECK(padded_rows == 16);
}

TEST_CASE("pad_and_grid: upscales small inputs to fit, never crops") {
    const PadGrid g = pad_and_grid(256, 256, {32, 32, 16});
    CHECK(g.scaled_w == 512);  // scaled up to the box, no padding
    CHECK(g.pad_fraction == 0.0);
    const PadGrid g2 = pad_and_grid(2048, 2048, {32, 32, 16});
    CHECK(g2.scaled_w == 512);  // scaled down into the box
    CHECK(g2.pad_fraction == 0.0);
}

TEST_CASE("pad_and_grid: pad fraction shrinks as candidate ratio nears image ratio") {
    // 512x256 image (ratio 2) against one-center candidates of rising ratio
    const std::vector<double> ratios = {1.0, 4.0 / 3.0, 1.5, 2.0};
    double prev = 1.0;
    for (double r : ratios) {
        const auto cands = candidate_set({512LL * 512}, 16, {r});
        const PadGrid g = pad_and_grid(512, 256, cands[0]);
        CHECK(g.pad_fraction <= prev);
        prev = g.pad_fraction;
    }
    CHECK(prev == 0.0);  // the matching ratio fits exactly
}

TEST_CASE("bucket_batches: same-shape items share one waste-free bucket") {
    const auto cands = default_candidates();
    std::vector<Item> items;
    for (int i = 0; i < 10; ++i) items.push_back({"img" + std::to_string(i), 512, 512});
    RngState rng{1, 0};
    const BucketPlan plan = bucket_batches(items, cands, 4, rng);
    CHECK(plan.buckets.size() == 1);
    CHECK(plan.buckets[0].member_ids.size() == 10);
    CHECK(plan.padding_waste == 0.0);
}

TEST_CASE("bucket_batches: deterministic per seed and covers every item once") {
    const auto cands = default_candidates();
    RngState grow{5, 0};
    std::vector<Item> items;
    for (int i = 0; i < 60; ++i) {
        items.push_back({"i" + std::to_string(i), 64 + (int)grow.next_below(1600),
                         64 + (int)grow.next_below(1600)});
    }
    RngState a{2, 0}, b{2, 0};
    const BucketPlan p1 = bucket_batches(items, cands, 8, a);
    const BucketPlan p2 = bucket_batches(items, cands, 8, b);
    std::multiset<std::string> seen;
    size_t total = 0;
    for (size_t k = 0; k < p1.buckets.size(); ++k) {
        CHECK(p1.buckets[k].member_ids == p2.buckets[k].member_ids);
        for (const auto& id : p1.buckets[k].member_ids) seen.insert(id);
        total += p1.buckets[k].member_ids.size();
    }
    CHECK(total == items.size());
    CHECK(seen.size() == items.size());
    for (const Item& it : items) CHECK(seen.count(it.id) == 1);
}

TEST_CASE("bucket_batches: waste beats random batching on a mixed distribution") {
    const auto cands = default_candidates();
    RngState mk{33, 0};
    std::vector<Item> items;
    const std::vector<std::pair<int, int>> shapes = {
        {512, 512}, {1024, 512}, {512, 1024}, {768, 576}, {640, 480}, {300, 900}, {1920, 1080}};
    for (int i = 0; i < 140; ++i) {
        auto [w, h] = shapes[mk.next_below(shapes.size())];
        // jitter so resolutions are not perfectly aligned to the grid
        w += static_cast<int>(mk.next_below(40));
        h += static_cast<int>(mk.next_below(40));
        items.push_back({"i" + std::to_string(i), w, h});
    }
    RngState r1{4, 0}, r2{4, 0};
    const double bucketed = bucket_batches(items, cands, 8, r1).padding_waste;
    const double baseline = random_batching_waste(items, cands, 8, r2);
    CHECK(bucketed <= baseline);
}

TEST_CASE("ntk freqs: scale 1 equals plain RoPE and j=0 is always 1") {
    const RopeFreqs plain = ntk_rope_freqs(16, 10000.0, 1.0);
    for (int j = 0; j < 8; ++j) {
        CHECK(plain.freqs[j] ==
              doctest::Approx(std::pow(10000.0, -2.0 * j / 16.0)).epsilon(1e-12));
    }
    CHECK(plain.freqs[0] == 1.0);
    CHECK(ntk_rope_freqs(8, 500.0, 7.0).freqs[0] == 1.0);
}

TEST_CASE("ntk freqs: dim 8 base 10000 scale 4 matches hand arithmetic") {
    const RopeFreqs f = ntk_rope_freqs(8, 10000.0, 4.0);
    const double adjusted = 10000.0 * std::pow(4.0, 8.0 / 6.0);
    for (int j = 0; j < 4; ++j) {
        CHECK(f.freqs[j] == doctest::Approx(std::pow(adjusted, -2.0 * j / 8.0)).epsilon(1e-12));
    }
    // strictly decreasing
    for (int j = 1; j < 4; ++j) CHECK(f.freqs[j] < f.freqs[j - 1]);
    CHECK_THROWS(ntk_rope_freqs(7, 10000.0, 1.0));
}

TEST_CASE("rope 2d: zero position is the identity") {
    RngState rng{12, 0};
    Tensor x = sample_gaussian(rng, {3, 8});
    const RopeFreqs f = ntk_rope_freqs(8, 10000.0, 1.0);
    Tensor out = apply_rope_2d(x, {{0, 0}, {0, 0}, {0, 0}}, f);
    CHECK(out.data == x.data);
}

TEST_CASE("rope 2d: preserves per-pair norms") {
    RngState rng{13, 0};
    Tensor x = sample_gaussian(rng, {4, 16});
    const RopeFreqs f = ntk_rope_freqs(16, 10000.0, 2.0);
    std::vector<std::pair<int, int>> pos = {{3, 9}, {1, 2}, {14, 7}, {0, 31}};
    Tensor out = apply_rope_2d(x, pos, f);
    for (size_t t = 0; t < 4; ++t) {
        for (size_t j = 0; j < 8; ++j) {
            const double n_in = std::hypot(x.at(t, 2 * j), x.at(t, 2 * j + 1));
            const double n_out = std::hypot(out.at(t, 2 * j), out.at(t, 2 * j + 1));
            CHECK(std::abs(n_in - n_out) <= 1e-12);
        }
    }
}

TEST_CASE("rope 2d: dot products depend only on relative position") {
    RngState rng{14, 0};
    const RopeFreqs f = ntk_rope_freqs(8, 10000.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        Tensor q = sample_gaussian(rng, {1, 8});
        Tensor k = sample_gaussian(rng, {1, 8});
        const int r1 = (int)rng.next_below(32), c1 = (int)rng.next_below(32);
        const int r2 = (int)rng.next_below(32), c2 = (int)rng.next_below(32);
        const int dr = (int)rng.next_below(16), dc = (int)rng.next_below(16);
        const double d1 = dot(apply_rope_2d(q, {{r1, c1}}, f), apply_rope_2d(k, {{r2, c2}}, f));
        const double d2 = dot(apply_rope_2d(q, {{r1 + dr, c1 + dc}}, f),
                              apply_rope_2d(k, {{r2 + dr, c2 + dc}}, f));
        CHECK(std::abs(d1 - d2) <= 1e-9);
    }
}

TEST_SUITE_END();
