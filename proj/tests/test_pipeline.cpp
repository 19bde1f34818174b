#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "pixkit/pipeline.hpp"
#include "pixkit/rng.hpp"

using namespace pixkit;
using namespace pixkit::pipeline;

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("render: referring-segmentation template") {
    InstructionTemplate t{"grounding_seg",
                          "Please mark the pixels in {color} based on the referring description: "
                          "{caption}",
                          0};
    const std::string got = render_instruction(t, {{"color", "red"}, {"caption", "the left dog"}});
    CHECK(got ==
          "Please mark the pixels in red based on the referring description: the left dog");
}

TEST_CASE("render: literal templates, missing and extra variables") {
    InstructionTemplate plain{"t2i", "Draw a quiet harbor at dawn.", 0};
    CHECK(render_instruction(plain, {}) == "Draw a quiet harbor at dawn.");
    // extra vars are ignored
    CHECK(render_instruction(plain, {{"color", "red"}}) == "Draw a quiet harbor at dawn.");

    InstructionTemplate needs{"seg", "Segment with {color}", 0};
    CHECK_THROWS_WITH_AS(render_instruction(needs, {}), doctest::Contains("color"),
                         std::runtime_error);
}

TEST_CASE("render: injective over vars when placeholders are separated by text") {
    InstructionTemplate t{"box", "Mark {a} then {b}.", 0};
    const std::string r1 = render_instruction(t, {{"a", "x"}, {"b", "y"}});
    const std::string r2 = render_instruction(t, {{"a", "y"}, {"b", "x"}});
    CHECK(r1 != r2);
}

static std::vector<TaskRecord> demo_tasks() {
    return {
        {"depth", {{"synthetic_rooms", 50}}, 2.0},
        {"seg", {{"scenes_a", 700}, {"scenes_b", 300}}, 0.5},
        {"derain", {{"rainy", 180}}, 1.0},
        {"text_to_image", {{"captions", 400}}, 1.0},
    };
}

TEST_CASE("stage1: small pools repeat exactly, large pools subsample distinct") {
    RngState rng{1, 0};
    const MixPlan plan = stage1_plan(demo_tasks(), 200, rng);
    for (const auto& [task, total] : plan.per_task_totals) CHECK(total == 200);

    std::map<std::string, std::map<std::pair<std::string, int>, int>> counts;
    for (const PlanEntry& e : plan.entries) {
        counts[e.task_id][{e.dataset_id, e.item_index}]++;
    }
    // 50-item task at target 200: every item exactly 4 times
    CHECK(counts["depth"].size() == 50);
    for (const auto& [item, n] : counts["depth"]) CHECK(n == 4);
    // 1000-item task at target 200: 200 distinct items, no repeats
    CHECK(counts["seg"].size() == 200);
    for (const auto& [item, n] : counts["seg"]) CHECK(n == 1);
    // indices stay within dataset bounds
    for (const PlanEntry& e : plan.entries) {
        CHECK(e.item_index >= 0);
        if (e.dataset_id == "scenes_a") CHECK(e.item_index < 700);
        if (e.dataset_id == "scenes_b") CHECK(e.item_index < 300);
    }
    CHECK_THROWS(stage1_plan({{"empty", {{"none", 0}}, 1.0}}, 10, rng));
    CHECK_THROWS(stage1_plan(demo_tasks(), 0, rng));
}

TEST_CASE("stage1: deterministic per seed") {
    RngState a{5, 0}, b{5, 0}, c{6, 0};
    const MixPlan p1 = stage1_plan(demo_tasks(), 120, a);
    const MixPlan p2 = stage1_plan(demo_tasks(), 120, b);
    const MixPlan p3 = stage1_plan(demo_tasks(), 120, c);
    REQUIRE(p1.entries.size() == p2.entries.size());
    bool same12 = true, same13 = true;
    for (size_t i = 0; i < p1.entries.size(); ++i) {
        same12 = same12 && p1.entries[i].item_index == p2.entries[i].item_index &&
                 p1.entries[i].dataset_id == p2.entries[i].dataset_id;
        same13 = same13 && p1.entries[i].item_index == p3.entries[i].item_index &&
                 p1.entries[i].dataset_id == p3.entries[i].dataset_id;
    }
    CHECK(same12);
    CHECK_FALSE(same13);
}

TEST_CASE("stage2: weighted totals and exact repeats") {
    RngState rng{2, 0};
    const MixPlan plan = stage2_plan(demo_tasks(), rng);  // no t2i balancing
    CHECK(plan.per_task_totals.at("depth") == 100);   // weight 2.0 on 50
    CHECK(plan.per_task_totals.at("seg") == 500);     // weight 0.5 on 1000
    CHECK(plan.per_task_totals.at("derain") == 180);  // weight 1.0
    CHECK(plan.per_task_totals.at("text_to_image") == 400);

    std::map<std::pair<std::string, int>, int> depth_counts;
    for (const PlanEntry& e : plan.entries) {
        if (e.task_id == "depth") depth_counts[{e.dataset_id, e.item_index}]++;
    }
    CHECK(depth_counts.size() == 50);
    for (const auto& [item, n] : depth_counts) CHECK(n == 2);  // weight 2.0: exactly twice

    std::set<int> seg_items;
    int seg_total = 0;
    for (const PlanEntry& e : plan.entries) {
        if (e.task_id == "seg") {
            seg_items.insert(e.item_index + (e.dataset_id == "scenes_b" ? 1000 : 0));
            ++seg_total;
        }
    }
    CHECK(seg_total == 500);
    CHECK(seg_items.size() == 500);  // subsample without replacement
}

TEST_CASE("stage2: text-to-image sized 1:1 with everything else") {
    RngState rng{3, 0};
    const MixPlan plan = stage2_plan(demo_tasks(), rng, "text_to_image");
    const int others = plan.per_task_totals.at("depth") + plan.per_task_totals.at("seg") +
                       plan.per_task_totals.at("derain");
    CHECK(plan.per_task_totals.at("text_to_image") == others);
    CHECK_THROWS_WITH_AS(stage2_plan(demo_tasks(), rng, "nope"), doctest::Contains("nope"),
                         std::runtime_error);
}

TEST_CASE("epoch order: multiset preserved, deterministic, seeds differ") {
    RngState rng{4, 0};
    const MixPlan plan = stage1_plan(demo_tasks(), 40, rng);
    RngState s1{9, 0}, s2{9, 0}, s3{10, 0};
    const auto o1 = epoch_order(plan, s1);
    const auto o2 = epoch_order(plan, s2);
    const auto o3 = epoch_order(plan, s3);
    REQUIRE(o1.size() == plan.entries.size());

    const auto key = [](const PlanEntry& e) {
        return e.task_id + "/" + e.dataset_id + "/" + std::to_string(e.item_index);
    };
    std::multiset<std::string> m0, m1;
    for (const auto& e : plan.entries) m0.insert(key(e));
    for (const auto& e : o1) m1.insert(key(e));
    CHECK(m0 == m1);

    bool same12 = true, same13 = true;
    for (size_t i = 0; i < o1.size(); ++i) {
        same12 = same12 && key(o1[i]) == key(o2[i]);
        same13 = same13 && key(o1[i]) == key(o3[i]);
    }
    CHECK(same12);
    CHECK_FALSE(same13);  // > 10 entries: collision odds are negligible
}

TEST_SUITE_END();
