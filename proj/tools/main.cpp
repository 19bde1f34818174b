// pixkit CLI: codecs, mask generation, bucket planning, the 2D flow-matching
// demo, metrics, and data-balancing plans behind one binary.
//
// Exit codes: 0 success, 2 usage/config error, 3 runtime/domain error.
// Every command is deterministic given --seed (PIXKIT_SEED is the fallback)
// and writes outputs atomically (temp file + rename).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pixkit/anyres.hpp"
#include "pixkit/codecs.hpp"
#include "pixkit/flow.hpp"
#include "pixkit/metrics.hpp"
#include "pixkit/pipeline.hpp"
#include "pixkit/png_io.hpp"
#include "pixkit/rng.hpp"
#include "pixkit/toymodel.hpp"
#include "pixkit/tsr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pixkit;

namespace {

// config/usage problems exit 2; domain/runtime problems exit 3
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_input(const fs::path& p) {
    if (!fs::exists(p)) throw UsageError("input not found: " + p.string());
}

// ---------------------------------------------------------------------------
// atomic output helpers
// ---------------------------------------------------------------------------

template <typename WriteFn>
void atomic_write(const fs::path& target, WriteFn&& write) {
    const fs::path tmp = target.string() + ".tmp";
    write(tmp);
    fs::rename(tmp, target);
}

void write_text_atomic(const fs::path& target, const std::string& text) {
    atomic_write(target, [&](const fs::path& tmp) {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + tmp.string());
        f << text;
    });
}

// ---------------------------------------------------------------------------
// small parsers and serializers
// ---------------------------------------------------------------------------

Rgb parse_rgb(const std::string& s) {
    int r, g, b;
    char c1, c2;
    std::istringstream in(s);
    if (!(in >> r >> c1 >> g >> c2 >> b) || c1 != ',' || c2 != ',' || r < 0 || r > 255 || g < 0 ||
        g > 255 || b < 0 || b > 255) {
        throw UsageError("expected a color like 255,0,0 but got '" + s + "'");
    }
    return {static_cast<uint8_t>(r), static_cast<uint8_t>(g), static_cast<uint8_t>(b)};
}

std::pair<double, double> parse_range(const std::string& s) {
    const size_t colon = s.find(':');
    if (colon == std::string::npos) {
        throw UsageError("expected a range like 0.4:0.5, got '" + s + "'");
    }
    try {
        return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw UsageError("expected a range like 0.4:0.5, got '" + s + "'");
    }
}

codecs::Palette load_palette(const fs::path& path) {
    require_input(path);
    std::ifstream f(path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::exception& e) {
        throw UsageError("bad palette JSON in " + path.string() + ": " + e.what());
    }
    codecs::Palette pal;
    for (const json& e : doc) {
        const auto& rgb = e.at("rgb");
        pal.entries.push_back({e.at("id").get<uint32_t>(),
                               Rgb{rgb.at(0).get<uint8_t>(), rgb.at(1).get<uint8_t>(),
                                   rgb.at(2).get<uint8_t>()}});
    }
    return pal;
}

LabelMap load_labels(const fs::path& path) {
    require_input(path);
    std::ifstream f(path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::exception& e) {
        throw UsageError("bad label JSON in " + path.string() + ": " + e.what());
    }
    LabelMap l(doc.at("height").get<int>(), doc.at("width").get<int>());
    const auto& labels = doc.at("labels");
    if (labels.size() != l.labels.size()) throw UsageError("label count does not match dimensions");
    for (size_t i = 0; i < l.labels.size(); ++i) l.labels[i] = labels[i].get<uint32_t>();
    return l;
}

std::string labels_to_json(const LabelMap& l) {
    json doc = {{"height", l.height}, {"width", l.width}, {"labels", l.labels}};
    return doc.dump() + "\n";
}

DepthMap tensor_to_depth(const Tensor& t) {
    if (t.rank() != 2) throw UsageError("depth tensor must be rank-2 (h x w)");
    DepthMap d(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]));
    d.values = t.data;
    return d;
}

NormalMap tensor_to_normals(const Tensor& t) {
    if (t.rank() != 3 || t.shape[2] != 3) throw UsageError("normal tensor must be h x w x 3");
    NormalMap n(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]));
    n.vectors = t.data;
    return n;
}

void save_png_atomic(const RgbImage& img, const fs::path& target) {
    atomic_write(target, [&](const fs::path& tmp) { save_png(img, tmp); });
}

void save_tsr_atomic(const Tensor& t, const fs::path& target) {
    atomic_write(target, [&](const fs::path& tmp) { save_tsr(t, tmp); });
}

std::string report_line(const metrics::MetricReport& r) {
    json doc = {{"name", r.name},
                {"value", r.infinite ? json(nullptr) : json(r.value)},
                {"infinite", r.infinite},
                {"count", r.count}};
    return doc.dump();
}

// ---------------------------------------------------------------------------
// codec subcommand
// ---------------------------------------------------------------------------

struct CodecArgs {
    std::string action;
    std::string in, out, palette, mask;
    std::string color = "255,0,0";
    std::string fill = "white";
    double d_min = 0.0, d_max = 10.0;
    double alpha = 0.5, hue_tol = 18.0, sat_min = 0.3;
    int threshold = 128, thickness = 2, tol = 8;
    int height = 256, width = 256;
    std::string box;
};

int run_codec(const CodecArgs& a) {
    const auto& act = a.action;
    if (act == "depth-enc") {
        require_input(a.in);
        const DepthMap d = tensor_to_depth(load_tsr(a.in));
        save_png_atomic(codecs::encode_depth(d, {a.d_min, a.d_max}), a.out);
    } else if (act == "depth-dec") {
        require_input(a.in);
        const DepthMap d = codecs::decode_depth(load_png(a.in), {a.d_min, a.d_max});
        Tensor t({static_cast<size_t>(d.height), static_cast<size_t>(d.width)}, d.values);
        save_tsr_atomic(t, a.out);
    } else if (act == "seg-enc") {
        save_png_atomic(codecs::encode_labels(load_labels(a.in), load_palette(a.palette)), a.out);
    } else if (act == "seg-dec") {
        require_input(a.in);
        const LabelMap l = codecs::decode_labels(load_png(a.in), load_palette(a.palette));
        write_text_atomic(a.out, labels_to_json(l));
    } else if (act == "norm-enc") {
        require_input(a.in);
        save_png_atomic(codecs::encode_normals(tensor_to_normals(load_tsr(a.in))), a.out);
    } else if (act == "norm-dec") {
        require_input(a.in);
        const NormalMap n = codecs::decode_normals(load_png(a.in));
        Tensor t({static_cast<size_t>(n.height), static_cast<size_t>(n.width), 3}, n.vectors);
        save_tsr_atomic(t, a.out);
    } else if (act == "mask2rgb" || act == "rgb2mask") {
        // both normalize through the binary mask; rgb2mask honors --threshold
        require_input(a.in);
        save_png_atomic(codecs::mask_to_rgb(codecs::rgb_to_mask(load_png(a.in), a.threshold)),
                        a.out);
    } else if (act == "overlay") {
        require_input(a.in);
        require_input(a.mask);
        const BinaryMask m = codecs::rgb_to_mask(load_png(a.mask));
        save_png_atomic(codecs::overlay_mask(load_png(a.in), m, parse_rgb(a.color), a.alpha),
                        a.out);
    } else if (act == "extract-hsv") {
        require_input(a.in);
        const BinaryMask m =
            codecs::extract_mask_hsv(load_png(a.in), parse_rgb(a.color), a.hue_tol, a.sat_min);
        save_png_atomic(codecs::mask_to_rgb(m), a.out);
    } else if (act == "bbox-draw") {
        require_input(a.in);
        int x0, y0, x1, y1;
        char c1, c2, c3;
        std::istringstream box_in(a.box);
        if (!(box_in >> x0 >> c1 >> y0 >> c2 >> x1 >> c3 >> y1)) {
            throw UsageError("expected --box x0,y0,x1,y1");
        }
        save_png_atomic(
            codecs::draw_bbox(load_png(a.in), {x0, y0, x1, y1}, parse_rgb(a.color), a.thickness),
            a.out);
    } else if (act == "bbox-extract") {
        require_input(a.in);
        const BBox b = codecs::extract_bbox(load_png(a.in), parse_rgb(a.color), a.tol);
        json doc = {{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}};
        write_text_atomic(a.out, doc.dump() + "\n");
    } else if (act == "canvas") {
        const auto fill = a.fill == "black" ? codecs::MaskFill::black : codecs::MaskFill::white;
        save_png_atomic(codecs::blank_canvas(a.height, a.width, fill), a.out);
    } else {
        throw UsageError("unknown codec action: " + act);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// mask subcommand
// ---------------------------------------------------------------------------

struct MaskArgs {
    int height = 512, width = 512;
    std::string out;
    std::string area = "0.4:0.5";
    std::string count = "1:4";
    std::string shapes = "circle,rectangle,freeform";
    std::string outpaint_keep;  // e.g. 0.3:0.6 switches to outpaint mode
    double extend_right = 0.0;  // > 0 switches to extend mode
    std::string box_out;
    std::string apply, apply_out;
    std::string fill = "black";
    uint64_t seed = 0;
};

int run_mask(const MaskArgs& a) {
    RngState rng{a.seed, 0};
    BinaryMask mask;
    if (a.extend_right > 0.0) {
        mask = codecs::extend_right_mask(a.height, a.width, a.extend_right);
    } else if (!a.outpaint_keep.empty()) {
        const auto [lo, hi] = parse_range(a.outpaint_keep);
        auto [m, kept] = codecs::gen_outpaint_mask(rng, a.height, a.width, lo, hi);
        mask = std::move(m);
        if (!a.box_out.empty()) {
            json doc = {{"x0", kept.x0}, {"y0", kept.y0}, {"x1", kept.x1}, {"y1", kept.y1}};
            write_text_atomic(a.box_out, doc.dump() + "\n");
        }
    } else {
        codecs::InpaintMaskSpec spec;
        std::tie(spec.area_min, spec.area_max) = parse_range(a.area);
        const auto [clo, chi] = parse_range(a.count);
        spec.count_min = static_cast<int>(clo);
        spec.count_max = static_cast<int>(chi);
        spec.circles = a.shapes.find("circle") != std::string::npos;
        spec.rectangles = a.shapes.find("rectangle") != std::string::npos;
        spec.freeform = a.shapes.find("freeform") != std::string::npos;
        spec.fill = a.fill == "white" ? codecs::MaskFill::white : codecs::MaskFill::black;
        mask = codecs::gen_inpaint_mask(rng, a.height, a.width, spec);
    }
    if (!a.apply.empty()) {
        require_input(a.apply);
        const auto fill = a.fill == "white" ? codecs::MaskFill::white : codecs::MaskFill::black;
        const std::string out = a.apply_out.empty() ? a.out + ".applied.png" : a.apply_out;
        save_png_atomic(codecs::apply_mask_fill(load_png(a.apply), mask, fill), out);
    }
    save_png_atomic(codecs::mask_to_rgb(mask), a.out);
    std::cout << "mask " << a.out << " true_fraction " << mask.true_fraction() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bucket-plan subcommand
// ---------------------------------------------------------------------------

int run_bucket_plan(const std::string& in, const std::string& out, int batch_size, uint64_t seed) {
    require_input(in);
    std::ifstream f(in);
    std::vector<anyres::Item> items;
    std::string line;
    while (std::getline(f, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#' || line.rfind("id,", 0) == 0) continue;
        std::istringstream row(line);
        anyres::Item item;
        char comma;
        if (!(std::getline(row, item.id, ',') && row >> item.w >> comma >> item.h) ||
            comma != ',') {
            throw UsageError("bad CSV row: " + line);
        }
        items.push_back(std::move(item));
    }
    if (items.empty()) throw UsageError("no items in " + in);

    const auto candidates = anyres::default_candidates();
    RngState rng{seed, 0};
    const anyres::BucketPlan plan = anyres::bucket_batches(items, candidates, batch_size, rng);
    RngState baseline_rng{seed, 0};
    const double baseline =
        anyres::random_batching_waste(items, candidates, batch_size, baseline_rng);

    json buckets = json::array();
    for (const anyres::Bucket& b : plan.buckets) {
        buckets.push_back({{"candidate",
                            {{"tokens_w", b.candidate.tokens_w},
                             {"tokens_h", b.candidate.tokens_h},
                             {"patch_px", b.candidate.patch_px}}},
                           {"members", b.member_ids}});
    }
    json doc = {{"batch_size", plan.batch_size},
                {"padding_waste", plan.padding_waste},
                {"random_baseline_waste", baseline},
                {"buckets", buckets}};
    write_text_atomic(out, doc.dump(2) + "\n");
    std::cout << "buckets " << plan.buckets.size() << " padding_waste " << plan.padding_waste
              << " baseline " << baseline << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// flow-demo subcommand
// ---------------------------------------------------------------------------

struct FlowDemoConfig {
    toy::ToyDataset dataset;
    toy::TrainConfig train;
    int hidden = 64;
    int mod_dim = 16;
};

FlowDemoConfig load_flow_config(const fs::path& path) {
    require_input(path);
    std::ifstream f(path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::exception& e) {
        throw UsageError("bad config JSON: " + std::string(e.what()));
    }
    FlowDemoConfig cfg;
    for (const json& c : doc.at("dataset").at("components")) {
        cfg.dataset.components.push_back({c.at("mean").at(0).get<double>(),
                                          c.at("mean").at(1).get<double>(),
                                          c.at("std").get<double>(),
                                          c.at("label").get<std::string>()});
    }
    const json& t = doc.at("train");
    cfg.train.steps = t.value("steps", 4000);
    cfg.train.batch_size = t.value("batch_size", 128);
    cfg.train.learning_rate = t.value("learning_rate", 0.05);
    cfg.train.seed = t.value("seed", 0);
    if (t.contains("dropout")) {
        cfg.train.p_drop_image = t["dropout"].value("image", 0.05);
        cfg.train.p_drop_text = t["dropout"].value("text", 0.05);
        cfg.train.p_drop_both = t["dropout"].value("both", 0.05);
    }
    cfg.hidden = t.value("hidden", 64);
    cfg.mod_dim = t.value("mod_dim", 16);
    return cfg;
}

int run_flow_train(const std::string& config, const std::string& ckpt_out,
                   const std::string& loss_csv, int steps_override, uint64_t seed_override,
                   bool seed_given) {
    FlowDemoConfig cfg = load_flow_config(config);
    if (steps_override > 0) cfg.train.steps = steps_override;
    if (seed_given) cfg.train.seed = seed_override;

    RngState init{cfg.train.seed, 1};  // weight init on its own stream
    toy::VelocityMlp base = toy::make_mlp(2, 0, cfg.hidden, cfg.mod_dim, init);
    toy::VelocityMlp model = toy::zero_init_extend(base, 2);
    const toy::TrainResult result = toy::train(model, cfg.dataset, cfg.train);

    // checkpoint directory, swapped into place as a unit
    const fs::path tmp_dir = ckpt_out + ".tmp";
    fs::remove_all(tmp_dir);
    toy::save_checkpoint(result.model, tmp_dir);
    fs::remove_all(ckpt_out);
    fs::rename(tmp_dir, ckpt_out);

    std::ostringstream csv;
    csv << "step,loss\n";
    for (size_t i = 0; i < result.loss_trace.size(); ++i) {
        csv << i << "," << result.loss_trace[i] << "\n";
    }
    write_text_atomic(loss_csv, csv.str());

    const size_t tail = std::max<size_t>(1, result.loss_trace.size() / 10);
    const double final_loss =
        std::accumulate(result.loss_trace.end() - tail, result.loss_trace.end(), 0.0) /
        static_cast<double>(tail);
    std::cout << "trained " << cfg.train.steps << " steps, initial loss "
              << result.loss_trace.front() << ", final-window loss " << final_loss << "\n";
    return 0;
}

RgbImage density_grid(const std::vector<std::array<double, 2>>& points, int bins, double extent) {
    std::vector<int> hist(static_cast<size_t>(bins) * bins, 0);
    int peak = 1;
    for (const auto& p : points) {
        const int bx = static_cast<int>((p[0] + extent) / (2 * extent) * bins);
        const int by = static_cast<int>((p[1] + extent) / (2 * extent) * bins);
        if (bx < 0 || bx >= bins || by < 0 || by >= bins) continue;
        peak = std::max(peak, ++hist[static_cast<size_t>(by) * bins + bx]);
    }
    RgbImage img(bins, bins);
    for (int y = 0; y < bins; ++y) {
        for (int x = 0; x < bins; ++x) {
            const uint8_t v =
                static_cast<uint8_t>(255.0 * hist[static_cast<size_t>(y) * bins + x] / peak);
            img.set(y, x, {v, v, v});
        }
    }
    return img;
}

int run_flow_sample(const std::string& config, const std::string& ckpt, const std::string& label,
                    int n, const std::string& out_csv, const std::string& density_png,
                    int nfe_steps, const std::string& solver_name, double shift, double w_image,
                    double w_text, const std::string& hint_mode, uint64_t seed) {
    const toy::VelocityMlp model = toy::load_checkpoint(ckpt);  // missing -> runtime error (3)
    FlowDemoConfig cfg = load_flow_config(config);

    flow::SolverKind solver;
    if (solver_name == "euler") solver = flow::SolverKind::euler;
    else if (solver_name == "heun") solver = flow::SolverKind::heun;
    else if (solver_name == "midpoint") solver = flow::SolverKind::midpoint;
    else throw UsageError("unknown solver: " + solver_name);

    const flow::Schedule schedule{shift == 1.0 ? flow::Schedule::Kind::uniform
                                               : flow::Schedule::Kind::shifted,
                                  shift, nfe_steps};

    std::optional<Tensor> hint;
    if (hint_mode == "mean") {
        for (const auto& c : cfg.dataset.components) {
            if (c.label == label) hint = Tensor::vec({c.mean_x, c.mean_y});
        }
        if (!hint) throw UsageError("label '" + label + "' not in dataset config");
    } else if (hint_mode != "none") {
        throw UsageError("--hint must be 'mean' or 'none'");
    }

    RngState rng{seed, 0};
    const toy::SampleResult result = toy::sample(model, n, label, {w_image, w_text}, solver,
                                                 schedule, rng, hint ? &*hint : nullptr);

    std::ostringstream csv;
    csv << "x,y\n";
    for (const auto& p : result.points) csv << p[0] << "," << p[1] << "\n";
    write_text_atomic(out_csv, csv.str());
    if (!density_png.empty()) {
        save_png_atomic(density_grid(result.points, 128, 4.0), density_png);
    }
    std::cout << "sampled " << n << " points, nfe_per_sample " << result.nfe_per_sample
              << " total_nfe " << static_cast<long long>(result.nfe_per_sample) * n << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// metrics subcommand
// ---------------------------------------------------------------------------

int run_metrics(const std::string& kind, const std::string& a_path, const std::string& b_path,
                const std::string& palette, int num_classes, const std::string& out) {
    require_input(a_path);
    require_input(b_path);
    std::vector<metrics::MetricReport> reports;
    if (kind == "image") {
        const RgbImage a = load_png(a_path), b = load_png(b_path);
        if (!a.same_dims(b)) throw UsageError("image dimensions differ");
        reports.push_back(metrics::psnr(a, b));
        if (a.height >= 8 && a.width >= 8) reports.push_back(metrics::ssim(a, b));
        reports.push_back(metrics::l1_distance(a, b));
    } else if (kind == "depth") {
        const DepthMap a = tensor_to_depth(load_tsr(a_path));
        const DepthMap b = tensor_to_depth(load_tsr(b_path));
        if (a.height != b.height || a.width != b.width) throw UsageError("depth dimensions differ");
        reports.push_back(metrics::rmse(a, b));
    } else if (kind == "normals") {
        const NormalMap a = tensor_to_normals(load_tsr(a_path));
        const NormalMap b = tensor_to_normals(load_tsr(b_path));
        if (a.height != b.height || a.width != b.width) {
            throw UsageError("normal dimensions differ");
        }
        reports.push_back(metrics::mean_angle_error(a, b));
    } else if (kind == "seg") {
        const codecs::Palette pal = load_palette(palette);
        const LabelMap a = codecs::decode_labels(load_png(a_path), pal);
        const LabelMap b = codecs::decode_labels(load_png(b_path), pal);
        if (a.height != b.height || a.width != b.width) throw UsageError("image dimensions differ");
        uint32_t max_class = num_classes > 0 ? static_cast<uint32_t>(num_classes) : 0;
        if (max_class == 0) {
            for (const auto& [id, rgb] : pal.entries) max_class = std::max(max_class, id + 1);
        }
        reports.push_back(metrics::miou(a, b, max_class));
    } else if (kind == "mask") {
        const BinaryMask a = codecs::rgb_to_mask(load_png(a_path));
        const BinaryMask b = codecs::rgb_to_mask(load_png(b_path));
        if (!a.same_dims(b)) throw UsageError("mask dimensions differ");
        reports.push_back(metrics::ciou({a}, {b}));
    } else {
        throw UsageError("unknown metrics kind: " + kind);
    }
    std::ostringstream lines;
    for (const auto& r : reports) lines << report_line(r) << "\n";
    if (!out.empty()) write_text_atomic(out, lines.str());
    std::cout << lines.str();
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline subcommand
// ---------------------------------------------------------------------------

int run_pipeline(const std::string& stage, const std::string& tasks_path, int target,
                 const std::string& t2i, const std::string& out, uint64_t seed) {
    require_input(tasks_path);
    std::vector<pipeline::TaskRecord> tasks;
    try {
        tasks = pipeline::load_tasks(tasks_path);
    } catch (const json::exception& e) {
        throw UsageError("bad tasks JSON: " + std::string(e.what()));
    }
    RngState rng{seed, 0};
    pipeline::MixPlan plan;
    if (stage == "stage1") {
        plan = pipeline::stage1_plan(tasks, target, rng);
    } else if (stage == "stage2") {
        plan = pipeline::stage2_plan(tasks, rng, t2i);
    } else {
        throw UsageError("stage must be stage1 or stage2");
    }
    std::ostringstream lines;
    for (const auto& e : plan.entries) {
        lines << json{{"task", e.task_id}, {"dataset", e.dataset_id}, {"index", e.item_index}}
                     .dump()
              << "\n";
    }
    write_text_atomic(out, lines.str());
    std::cout << "task totals:\n";
    for (const auto& [task, total] : plan.per_task_totals) {
        std::cout << "  " << task << " " << total << "\n";
    }
    return 0;
}

uint64_t env_seed_or_zero() {
    if (const char* env = std::getenv("PIXKIT_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError("PIXKIT_SEED must be an unsigned integer");
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pixel-space task-unification toolkit"};
    app.require_subcommand(1);

    CodecArgs codec;
    CLI::App* c = app.add_subcommand("codec", "dense-prediction and grounding codecs");
    c->add_option("action", codec.action,
                  "depth-enc|depth-dec|seg-enc|seg-dec|norm-enc|norm-dec|mask2rgb|rgb2mask|"
                  "overlay|extract-hsv|bbox-draw|bbox-extract|canvas")
        ->required();
    c->add_option("--in", codec.in, "input image/tensor/labels");
    c->add_option("--out", codec.out, "output path")->required();
    c->add_option("--palette", codec.palette, "palette JSON");
    c->add_option("--mask", codec.mask, "mask PNG");
    c->add_option("--color", codec.color, "color as R,G,B");
    c->add_option("--fill", codec.fill, "white|black");
    c->add_option("--dmin", codec.d_min, "depth range minimum (meters)");
    c->add_option("--dmax", codec.d_max, "depth range maximum (meters)");
    c->add_option("--alpha", codec.alpha, "overlay opacity");
    c->add_option("--hue-tol", codec.hue_tol, "hue tolerance, degrees");
    c->add_option("--sat-min", codec.sat_min, "minimum saturation");
    c->add_option("--threshold", codec.threshold, "binary threshold 0-255");
    c->add_option("--thickness", codec.thickness, "bbox frame thickness");
    c->add_option("--tol", codec.tol, "per-channel color tolerance");
    c->add_option("--height", codec.height, "canvas height");
    c->add_option("--width", codec.width, "canvas width");
    c->add_option("--box", codec.box, "box as x0,y0,x1,y1");

    MaskArgs mask;
    CLI::App* m = app.add_subcommand("mask", "inpaint/outpaint/extend mask generators");
    m->add_option("--height", mask.height, "mask height");
    m->add_option("--width", mask.width, "mask width");
    m->add_option("--out", mask.out, "output PNG")->required();
    m->add_option("--area", mask.area, "inpaint area fraction range lo:hi");
    m->add_option("--count", mask.count, "shape count range lo:hi");
    m->add_option("--shapes", mask.shapes, "subset of circle,rectangle,freeform");
    m->add_option("--outpaint-keep", mask.outpaint_keep, "outpaint kept-area range lo:hi");
    m->add_option("--extend-right", mask.extend_right, "mask the rightmost fraction");
    m->add_option("--box-out", mask.box_out, "write the kept rectangle JSON here");
    m->add_option("--apply", mask.apply, "also apply the mask to this image");
    m->add_option("--apply-out", mask.apply_out, "output for the applied image");
    m->add_option("--fill", mask.fill, "black|white fill when applying");
    m->add_option("--seed", mask.seed, "rng seed");

    std::string bp_in, bp_out;
    int bp_batch = 16;
    uint64_t bp_seed = 0;
    CLI::App* bp = app.add_subcommand("bucket-plan", "group resolutions into token buckets");
    bp->add_option("--in", bp_in, "CSV of id,w,h")->required();
    bp->add_option("--out", bp_out, "plan JSON")->required();
    bp->add_option("--batch-size", bp_batch, "items per batch");
    bp->add_option("--seed", bp_seed, "rng seed");

    CLI::App* fd = app.add_subcommand("flow-demo", "2D conditional flow-matching demo");
    fd->require_subcommand(1);
    std::string fd_config, fd_ckpt = "checkpoint", fd_loss = "loss.csv";
    int fd_steps = 0;
    uint64_t fd_seed = 0;
    CLI::App* ft = fd->add_subcommand("train", "train the velocity network");
    ft->add_option("--config", fd_config, "demo config JSON")->required();
    ft->add_option("--out", fd_ckpt, "checkpoint directory");
    ft->add_option("--loss-csv", fd_loss, "loss trace CSV");
    ft->add_option("--steps", fd_steps, "override training steps");
    ft->add_option("--seed", fd_seed, "override training seed");

    std::string fs_config, fs_ckpt = "checkpoint", fs_label, fs_out = "samples.csv", fs_png;
    std::string fs_solver = "heun", fs_hint = "mean";
    int fs_n = 1000, fs_nfe = 15;
    double fs_shift = 3.0, fs_wi = 1.5, fs_wt = 7.0;
    uint64_t fs_seed = 0;
    CLI::App* fsmp = fd->add_subcommand("sample", "sample from a trained checkpoint");
    fsmp->add_option("--config", fs_config, "demo config JSON")->required();
    fsmp->add_option("--ckpt", fs_ckpt, "checkpoint directory");
    fsmp->add_option("--label", fs_label, "class label to sample")->required();
    fsmp->add_option("-n", fs_n, "number of samples");
    fsmp->add_option("--out", fs_out, "samples CSV");
    fsmp->add_option("--density-png", fs_png, "density grid PNG");
    fsmp->add_option("--nfe", fs_nfe,
                     "integration steps (reported NFE scales with solver and CFG)");
    fsmp->add_option("--solver", fs_solver, "euler|heun|midpoint");
    fsmp->add_option("--shift", fs_shift, "time-schedule shift (1 = uniform)");
    fsmp->add_option("--wi", fs_wi, "image guidance weight");
    fsmp->add_option("--wt", fs_wt, "text guidance weight");
    fsmp->add_option("--hint", fs_hint, "image hint: mean|none");
    fsmp->add_option("--seed", fs_seed, "sampling seed");

    std::string mt_kind = "image", mt_a, mt_b, mt_palette, mt_out;
    int mt_classes = 0;
    CLI::App* mt = app.add_subcommand("metrics", "evaluation metrics");
    mt->add_option("--kind", mt_kind, "image|depth|normals|seg|mask");
    mt->add_option("--a", mt_a, "first input")->required();
    mt->add_option("--b", mt_b, "second input")->required();
    mt->add_option("--palette", mt_palette, "palette JSON for seg");
    mt->add_option("--classes", mt_classes, "class count for seg");
    mt->add_option("--out", mt_out, "JSON-lines output");

    std::string pl_stage, pl_tasks, pl_t2i, pl_out = "plan.jsonl";
    int pl_target = 200;
    uint64_t pl_seed = 0;
    CLI::App* pl = app.add_subcommand("pipeline", "two-stage data-balancing plans");
    pl->add_option("stage", pl_stage, "stage1|stage2")->required();
    pl->add_option("--tasks", pl_tasks, "tasks JSON")->required();
    pl->add_option("--target", pl_target, "stage-1 per-task target");
    pl->add_option("--t2i", pl_t2i, "stage-2 text-to-image task id");
    pl->add_option("--out", pl_out, "plan JSON-lines output");
    pl->add_option("--seed", pl_seed, "rng seed");

    try {
        app.parse(argc, argv);
        const uint64_t fallback = env_seed_or_zero();
        if (c->parsed()) return run_codec(codec);
        if (m->parsed()) {
            if (!m->count("--seed")) mask.seed = fallback;
            return run_mask(mask);
        }
        if (bp->parsed()) {
            if (!bp->count("--seed")) bp_seed = fallback;
            return run_bucket_plan(bp_in, bp_out, bp_batch, bp_seed);
        }
        if (fd->parsed()) {
            if (ft->parsed()) {
                return run_flow_train(fd_config, fd_ckpt, fd_loss, fd_steps, fd_seed,
                                      ft->count("--seed") > 0);
            }
            if (!fsmp->count("--seed")) fs_seed = fallback;
            return run_flow_sample(fs_config, fs_ckpt, fs_label, fs_n, fs_out, fs_png, fs_nfe,
                                   fs_solver, fs_shift, fs_wi, fs_wt, fs_hint, fs_seed);
        }
        if (mt->parsed()) return run_metrics(mt_kind, mt_a, mt_b, mt_palette, mt_classes, mt_out);
        if (pl->parsed()) {
            if (!pl->count("--seed")) pl_seed = fallback;
            return run_pipeline(pl_stage, pl_tasks, pl_target, pl_t2i, pl_out, pl_seed);
        }
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
