#include "pixkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace pixkit::pipeline {

using nlohmann::json;

int TaskRecord::total_items() const {
    int total = 0;
    for (const auto& [id, n] : dataset_sizes) {
        if (n < 0) throw std::invalid_argument("TaskRecord: negative item count");
        total += n;
    }
    return total;
}

std::string render_instruction(const InstructionTemplate& tmpl,
                               const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.text.size());
    size_t i = 0;
    while (i < tmpl.text.size()) {
        const char c = tmpl.text[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        const size_t close = tmpl.text.find('}', i);
        if (close == std::string::npos) {
            throw std::invalid_argument("render_instruction: unterminated placeholder in template");
        }
        const std::string name = tmpl.text.substr(i + 1, close - i - 1);
        const auto it = vars.find(name);
        if (it == vars.end()) {
            throw std::runtime_error("render_instruction: missing variable '" + name + "'");
        }
        out += it->second;
        i = close + 1;
    }
    return out;
}

// flat (dataset_id, item_index) pool for one task, datasets in declared order
static std::vector<PlanEntry> task_pool(const TaskRecord& t) {
    std::vector<PlanEntry> pool;
    pool.reserve(t.total_items());
    for (const auto& [dataset_id, n] : t.dataset_sizes) {
        for (int i = 0; i < n; ++i) pool.push_back({t.task_id, dataset_id, i});
    }
    return pool;
}

static void shuffle_entries(std::vector<PlanEntry>& v, RngState& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng.next_below(i)]);
    }
}

// first k of a seeded shuffle == k-subsample without replacement
static std::vector<PlanEntry> subsample(std::vector<PlanEntry> pool, size_t k, RngState& rng) {
    shuffle_entries(pool, rng);
    pool.resize(k);
    return pool;
}

MixPlan stage1_plan(const std::vector<TaskRecord>& tasks, int per_task_target, RngState& rng) {
    if (per_task_target < 1) throw std::invalid_argument("stage1_plan: target must be >= 1");
    MixPlan plan;
    for (const TaskRecord& t : tasks) {
        const std::vector<PlanEntry> pool = task_pool(t);
        if (pool.empty()) throw std::runtime_error("stage1_plan: task '" + t.task_id + "' has no items");
        const size_t target = static_cast<size_t>(per_task_target);
        if (pool.size() >= target) {
            const std::vector<PlanEntry> picked = subsample(pool, target, rng);
            plan.entries.insert(plan.entries.end(), picked.begin(), picked.end());
        } else {
            // repeat ceil(target/size) times, then truncate
            const size_t repeats = (target + pool.size() - 1) / pool.size();
            std::vector<PlanEntry> repeated;
            repeated.reserve(repeats * pool.size());
            for (size_t r = 0; r < repeats; ++r) {
                repeated.insert(repeated.end(), pool.begin(), pool.end());
            }
            repeated.resize(target);
            plan.entries.insert(plan.entries.end(), repeated.begin(), repeated.end());
        }
        plan.per_task_totals[t.task_id] = per_task_target;
    }
    return plan;
}

// full copies while they fit, then a subsample for the remainder
static std::vector<PlanEntry> take_exactly(const TaskRecord& t, size_t total, RngState& rng) {
    const std::vector<PlanEntry> pool = task_pool(t);
    if (pool.empty()) throw std::runtime_error("stage2_plan: task '" + t.task_id + "' has no items");
    std::vector<PlanEntry> out;
    out.reserve(total);
    while (out.size() + pool.size() <= total) {
        out.insert(out.end(), pool.begin(), pool.end());
    }
    const size_t rest = total - out.size();
    if (rest > 0) {
        const std::vector<PlanEntry> picked = subsample(pool, rest, rng);
        out.insert(out.end(), picked.begin(), picked.end());
    }
    return out;
}

MixPlan stage2_plan(const std::vector<TaskRecord>& tasks, RngState& rng,
                    const std::string& t2i_task_id) {
    MixPlan plan;
    const TaskRecord* t2i = nullptr;
    int others_total = 0;
    for (const TaskRecord& t : tasks) {
        if (!t2i_task_id.empty() && t.task_id == t2i_task_id) {
            t2i = &t;
            continue;
        }
        if (t.stage2_weight < 0.0) {
            throw std::invalid_argument("stage2_plan: negative weight for '" + t.task_id + "'");
        }
        const size_t total = static_cast<size_t>(
            std::llround(t.stage2_weight * static_cast<double>(t.total_items())));
        std::vector<PlanEntry> taken = take_exactly(t, total, rng);
        others_total += static_cast<int>(taken.size());
        plan.per_task_totals[t.task_id] = static_cast<int>(taken.size());
        plan.entries.insert(plan.entries.end(), taken.begin(), taken.end());
    }
    if (!t2i_task_id.empty()) {
        if (!t2i) {
            throw std::runtime_error("stage2_plan: text-to-image task '" + t2i_task_id +
                                     "' not found");
        }
        // 1:1 with everything else, regardless of the task's own weight
        std::vector<PlanEntry> taken =
            take_exactly(*t2i, static_cast<size_t>(others_total), rng);
        plan.per_task_totals[t2i->task_id] = static_cast<int>(taken.size());
        plan.entries.insert(plan.entries.end(), taken.begin(), taken.end());
    }
    return plan;
}

std::vector<PlanEntry> epoch_order(const MixPlan& plan, RngState& rng) {
    if (plan.entries.empty()) throw std::invalid_argument("epoch_order: empty plan");
    std::vector<PlanEntry> out = plan.entries;
    shuffle_entries(out, rng);
    return out;
}

std::vector<TaskRecord> load_tasks(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_tasks: cannot open " + path.string());
    json doc = json::parse(f);
    std::vector<TaskRecord> tasks;
    for (const json& jt : doc.at("tasks")) {
        TaskRecord t;
        t.task_id = jt.at("task_id").get<std::string>();
        for (const json& jd : jt.at("datasets")) {
            t.dataset_sizes.emplace_back(jd.at("dataset_id").get<std::string>(),
                                         jd.at("count").get<int>());
        }
        t.stage2_weight = jt.value("stage2_weight", 1.0);
        tasks.push_back(std::move(t));
    }
    return tasks;
}

std::vector<InstructionTemplate> load_templates(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_templates: cannot open " + path.string());
    json doc = json::parse(f);
    std::vector<InstructionTemplate> templates;
    for (const json& jt : doc.at("templates")) {
        InstructionTemplate t;
        t.task_id = jt.at("task_id").get<std::string>();
        t.text = jt.at("text").get<std::string>();
        t.variant_id = jt.at("variant_id").get<int>();
        templates.push_back(std::move(t));
    }
    return templates;
}

}  // namespace pixkit::pipeline
