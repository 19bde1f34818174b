#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pixkit/rng.hpp"

namespace pixkit::pipeline {

struct TaskRecord {
    std::string task_id;
    std::vector<std::pair<std::string, int>> dataset_sizes;  // (dataset_id, item count)
    double stage2_weight = 1.0;

    int total_items() const;
};

struct InstructionTemplate {
    std::string task_id;
    std::string text;  // placeholders written {name}
    int variant_id = 0;
};

/// Exact placeholder substitution; a placeholder missing from vars is an
/// error naming it, extra vars are ignored.
std::string render_instruction(const InstructionTemplate& tmpl,
                               const std::map<std::string, std::string>& vars);

struct PlanEntry {
    std::string task_id;
    std::string dataset_id;
    int item_index = 0;
};

struct MixPlan {
    std::vector<PlanEntry> entries;
    std::map<std::string, int> per_task_totals;
};

/// Stage-1 balancing: every task ends up with exactly per_task_target
/// entries. Small pools repeat ceil(target/size) times and truncate; large
/// pools subsample without replacement. Deterministic given rng.
MixPlan stage1_plan(const std::vector<TaskRecord>& tasks, int per_task_target, RngState& rng);

/// Stage-2 balancing: each task contributes round(weight*size) entries
/// (full repeats for the integer part, seeded subsample for the rest). When
/// t2i_task_id is non-empty, that task is instead sized 1:1 with the sum of
/// all other tasks; it must exist.
MixPlan stage2_plan(const std::vector<TaskRecord>& tasks, RngState& rng,
                    const std::string& t2i_task_id = "");

/// uniform shuffle of the plan entries, multiset preserved
std::vector<PlanEntry> epoch_order(const MixPlan& plan, RngState& rng);

std::vector<TaskRecord> load_tasks(const std::filesystem::path& path);
std::vector<InstructionTemplate> load_templates(const std::filesystem::path& path);

}  // namespace pixkit::pipeline
