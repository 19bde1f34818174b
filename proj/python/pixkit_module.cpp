// Python bindings for the pixkit core: tensors and images cross the boundary
// as numpy arrays (f64 for tensors, uint8 HxWx3 for images).

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pixkit/anyres.hpp"
#include "pixkit/attention.hpp"
#include "pixkit/codecs.hpp"
#include "pixkit/flow.hpp"
#include "pixkit/metrics.hpp"
#include "pixkit/pipeline.hpp"
#include "pixkit/png_io.hpp"
#include "pixkit/rng.hpp"
#include "pixkit/toymodel.hpp"

namespace py = pybind11;
using namespace pixkit;

namespace {

Tensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    std::vector<size_t> shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i) shape[i] = static_cast<size_t>(a.shape(i));
    std::vector<double> data(a.data(), a.data() + a.size());
    return Tensor(std::move(shape), std::move(data));
}

py::array_t<double> array_from_tensor(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<double> out(shape);
    std::copy(t.data.begin(), t.data.end(), out.mutable_data());
    return out;
}

RgbImage image_from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) {
        throw std::invalid_argument("expected an image array of shape (h, w, 3)");
    }
    RgbImage img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
    return img;
}

py::array_t<uint8_t> array_from_image(const RgbImage& img) {
    py::array_t<uint8_t> out({img.height, img.width, 3});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
}

BinaryMask mask_from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a mask array of shape (h, w)");
    BinaryMask m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    for (py::ssize_t i = 0; i < a.size(); ++i) m.bits[i] = a.data()[i] ? 1 : 0;
    return m;
}

py::array_t<uint8_t> array_from_mask(const BinaryMask& m) {
    py::array_t<uint8_t> out({m.height, m.width});
    std::copy(m.bits.begin(), m.bits.end(), out.mutable_data());
    return out;
}

codecs::Palette palette_from_list(const std::vector<std::pair<uint32_t, std::array<int, 3>>>& entries) {
    codecs::Palette pal;
    for (const auto& [id, rgb] : entries) {
        pal.entries.push_back({id, Rgb{static_cast<uint8_t>(rgb[0]), static_cast<uint8_t>(rgb[1]),
                                       static_cast<uint8_t>(rgb[2])}});
    }
    return pal;
}

Rgb rgb_from_tuple(const std::array<int, 3>& c) {
    return {static_cast<uint8_t>(c[0]), static_cast<uint8_t>(c[1]), static_cast<uint8_t>(c[2])};
}

py::dict report_to_dict(const metrics::MetricReport& r) {
    py::dict d;
    d["name"] = r.name;
    d["value"] = r.value;
    d["infinite"] = r.infinite;
    d["count"] = r.count;
    return d;
}

flow::SolverKind solver_from_name(const std::string& name) {
    if (name == "euler") return flow::SolverKind::euler;
    if (name == "heun") return flow::SolverKind::heun;
    if (name == "midpoint") return flow::SolverKind::midpoint;
    throw std::invalid_argument("unknown solver: " + name);
}

flow::Schedule schedule_from_args(const std::string& kind, double shift, int n_steps) {
    if (kind == "uniform") return {flow::Schedule::Kind::uniform, 1.0, n_steps};
    if (kind == "shifted") return {flow::Schedule::Kind::shifted, shift, n_steps};
    throw std::invalid_argument("unknown schedule kind: " + kind);
}

}  // namespace

PYBIND11_MODULE(pixkit, mod) {
    mod.doc() = "pixel-space task-unification toolkit";

    // --- numeric substrate -------------------------------------------------
    py::class_<RngState>(mod, "RngState")
        .def(py::init<uint64_t, uint64_t>(), py::arg("seed") = 0, py::arg("stream") = 0)
        .def_readwrite("seed", &RngState::seed)
        .def_readwrite("stream", &RngState::stream)
        .def("next_uniform", &RngState::next_uniform);

    mod.def("softmax", [](py::array_t<double> v) { return array_from_tensor(softmax(tensor_from_array(v))); });
    mod.def("sample_gaussian", [](RngState& rng, const std::vector<size_t>& shape) {
        return array_from_tensor(sample_gaussian(rng, shape));
    });
    mod.def("sample_gumbel", [](RngState& rng, const std::vector<size_t>& shape) {
        return array_from_tensor(sample_gumbel(rng, shape));
    });
    mod.def("finite_difference_gradient",
            [](const std::function<double(py::array_t<double>)>& f, py::array_t<double> x,
               double eps) {
                const auto wrapped = [&](const Tensor& t) { return f(array_from_tensor(t)); };
                return array_from_tensor(
                    finite_difference_gradient(wrapped, tensor_from_array(x), eps));
            },
            py::arg("f"), py::arg("x"), py::arg("eps") = 1e-5);

    // --- codecs -------------------------------------------------------------
    mod.def("encode_depth", [](py::array_t<double> d, double d_min, double d_max) {
        const Tensor t = tensor_from_array(d);
        if (t.rank() != 2) throw std::invalid_argument("depth must be 2D");
        DepthMap dm(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]));
        dm.values = t.data;
        return array_from_image(codecs::encode_depth(dm, {d_min, d_max}));
    }, py::arg("depth"), py::arg("d_min") = 0.0, py::arg("d_max") = 10.0);
    mod.def("decode_depth", [](py::array_t<uint8_t> img, double d_min, double d_max) {
        const DepthMap d = codecs::decode_depth(image_from_array(img), {d_min, d_max});
        Tensor t({static_cast<size_t>(d.height), static_cast<size_t>(d.width)}, d.values);
        return array_from_tensor(t);
    }, py::arg("image"), py::arg("d_min") = 0.0, py::arg("d_max") = 10.0);

    mod.def("encode_labels",
            [](const py::array_t<uint32_t, py::array::c_style | py::array::forcecast>& labels,
               const std::vector<std::pair<uint32_t, std::array<int, 3>>>& palette) {
                if (labels.ndim() != 2) throw std::invalid_argument("labels must be 2D");
                LabelMap l(static_cast<int>(labels.shape(0)), static_cast<int>(labels.shape(1)));
                std::copy(labels.data(), labels.data() + labels.size(), l.labels.begin());
                return array_from_image(codecs::encode_labels(l, palette_from_list(palette)));
            });
    mod.def("decode_labels",
            [](py::array_t<uint8_t> img,
               const std::vector<std::pair<uint32_t, std::array<int, 3>>>& palette) {
                const LabelMap l =
                    codecs::decode_labels(image_from_array(img), palette_from_list(palette));
                py::array_t<uint32_t> out({l.height, l.width});
                std::copy(l.labels.begin(), l.labels.end(), out.mutable_data());
                return out;
            });

    mod.def("encode_normals", [](py::array_t<double> n) {
        const Tensor t = tensor_from_array(n);
        if (t.rank() != 3 || t.shape[2] != 3) throw std::invalid_argument("normals must be (h,w,3)");
        NormalMap nm(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]));
        nm.vectors = t.data;
        return array_from_image(codecs::encode_normals(nm));
    });
    mod.def("decode_normals", [](py::array_t<uint8_t> img) {
        const NormalMap n = codecs::decode_normals(image_from_array(img));
        Tensor t({static_cast<size_t>(n.height), static_cast<size_t>(n.width), 3}, n.vectors);
        return array_from_tensor(t);
    });

    mod.def("mask_to_rgb", [](py::array_t<uint8_t> m) {
        return array_from_image(codecs::mask_to_rgb(mask_from_array(m)));
    });
    mod.def("rgb_to_mask", [](py::array_t<uint8_t> img, int threshold) {
        return array_from_mask(codecs::rgb_to_mask(image_from_array(img), threshold));
    }, py::arg("image"), py::arg("threshold") = 128);
    mod.def("overlay_mask",
            [](py::array_t<uint8_t> img, py::array_t<uint8_t> m, const std::array<int, 3>& color,
               double alpha) {
                return array_from_image(codecs::overlay_mask(
                    image_from_array(img), mask_from_array(m), rgb_from_tuple(color), alpha));
            },
            py::arg("image"), py::arg("mask"), py::arg("color"), py::arg("alpha") = 0.5);
    mod.def("extract_mask_hsv",
            [](py::array_t<uint8_t> img, const std::array<int, 3>& color, double hue_tol,
               double sat_min) {
                return array_from_mask(codecs::extract_mask_hsv(
                    image_from_array(img), rgb_from_tuple(color), hue_tol, sat_min));
            },
            py::arg("image"), py::arg("color"), py::arg("hue_tol") = 18.0,
            py::arg("sat_min") = 0.3);
    mod.def("draw_bbox",
            [](py::array_t<uint8_t> img, const std::array<int, 4>& box,
               const std::array<int, 3>& color, int thickness) {
                return array_from_image(
                    codecs::draw_bbox(image_from_array(img), {box[0], box[1], box[2], box[3]},
                                      rgb_from_tuple(color), thickness));
            },
            py::arg("image"), py::arg("box"), py::arg("color"), py::arg("thickness") = 2);
    mod.def("extract_bbox",
            [](py::array_t<uint8_t> img, const std::array<int, 3>& color, int tol) {
                const BBox b = codecs::extract_bbox(image_from_array(img), rgb_from_tuple(color), tol);
                return std::array<int, 4>{b.x0, b.y0, b.x1, b.y1};
            },
            py::arg("image"), py::arg("color"), py::arg("tol") = 8);
    mod.def("gen_inpaint_mask",
            [](RngState& rng, int h, int w, double area_min, double area_max) {
                codecs::InpaintMaskSpec spec;
                spec.area_min = area_min;
                spec.area_max = area_max;
                return array_from_mask(codecs::gen_inpaint_mask(rng, h, w, spec));
            },
            py::arg("rng"), py::arg("h"), py::arg("w"), py::arg("area_min") = 0.4,
            py::arg("area_max") = 0.5);
    mod.def("gen_outpaint_mask", [](RngState& rng, int h, int w, double keep_min, double keep_max) {
        auto [m, kept] = codecs::gen_outpaint_mask(rng, h, w, keep_min, keep_max);
        return py::make_tuple(array_from_mask(m),
                              std::array<int, 4>{kept.x0, kept.y0, kept.x1, kept.y1});
    });
    mod.def("extend_right_mask", [](int h, int w, double frac) {
        return array_from_mask(codecs::extend_right_mask(h, w, frac));
    });
    mod.def("blank_canvas", [](int h, int w, const std::string& fill) {
        return array_from_image(codecs::blank_canvas(
            h, w, fill == "black" ? codecs::MaskFill::black : codecs::MaskFill::white));
    }, py::arg("h"), py::arg("w"), py::arg("fill") = "white");
    mod.def("save_png", [](py::array_t<uint8_t> img, const std::string& path) {
        save_png(image_from_array(img), path);
    });
    mod.def("load_png", [](const std::string& path) { return array_from_image(load_png(path)); });

    // --- metrics ------------------------------------------------------------
    mod.def("psnr", [](py::array_t<uint8_t> a, py::array_t<uint8_t> b) {
        return report_to_dict(metrics::psnr(image_from_array(a), image_from_array(b)));
    });
    mod.def("ssim", [](py::array_t<uint8_t> a, py::array_t<uint8_t> b) {
        return report_to_dict(metrics::ssim(image_from_array(a), image_from_array(b)));
    });
    mod.def("l1_distance", [](py::array_t<uint8_t> a, py::array_t<uint8_t> b) {
        return report_to_dict(metrics::l1_distance(image_from_array(a), image_from_array(b)));
    });
    mod.def("ciou", [](const std::vector<py::array_t<uint8_t>>& preds,
                       const std::vector<py::array_t<uint8_t>>& gts) {
        std::vector<BinaryMask> p, g;
        for (const auto& a : preds) p.push_back(mask_from_array(a));
        for (const auto& a : gts) g.push_back(mask_from_array(a));
        return report_to_dict(metrics::ciou(p, g));
    });

    // --- any-resolution -------------------------------------------------------
    py::class_<anyres::PartitionCandidate>(mod, "PartitionCandidate")
        .def_readonly("tokens_w", &anyres::PartitionCandidate::tokens_w)
        .def_readonly("tokens_h", &anyres::PartitionCandidate::tokens_h)
        .def_readonly("patch_px", &anyres::PartitionCandidate::patch_px)
        .def("pixel_area", &anyres::PartitionCandidate::pixel_area)
        .def("ratio", &anyres::PartitionCandidate::ratio)
        .def("__repr__", [](const anyres::PartitionCandidate& c) {
            return "PartitionCandidate(" + std::to_string(c.tokens_w) + "x" +
                   std::to_string(c.tokens_h) + "@" + std::to_string(c.patch_px) + ")";
        });
    mod.def("default_candidates", &anyres::default_candidates);
    mod.def("select_partition", [](int w, int h, const std::vector<anyres::PartitionCandidate>& c) {
        return anyres::select_partition(w, h, c);
    });
    mod.def("pad_and_grid", [](int w, int h, const anyres::PartitionCandidate& c) {
        const anyres::PadGrid g = anyres::pad_and_grid(w, h, c);
        py::dict d;
        d["scaled_w"] = g.scaled_w;
        d["scaled_h"] = g.scaled_h;
        d["pad_fraction"] = g.pad_fraction;
        py::array_t<uint8_t> padded({g.tokens_h, g.tokens_w});
        std::copy(g.padded.begin(), g.padded.end(), padded.mutable_data());
        d["padded"] = padded;
        return d;
    });
    mod.def("ntk_rope_freqs", [](int head_dim, double base, double scale) {
        const anyres::RopeFreqs f = anyres::ntk_rope_freqs(head_dim, base, scale);
        py::array_t<double> out(static_cast<py::ssize_t>(f.freqs.size()));
        std::copy(f.freqs.begin(), f.freqs.end(), out.mutable_data());
        return out;
    }, py::arg("head_dim"), py::arg("base") = 10000.0, py::arg("scale") = 1.0);
    mod.def("apply_rope_2d",
            [](py::array_t<double> x, const std::vector<std::pair<int, int>>& positions,
               int head_dim, double base, double scale) {
                const anyres::RopeFreqs f = anyres::ntk_rope_freqs(head_dim, base, scale);
                return array_from_tensor(anyres::apply_rope_2d(tensor_from_array(x), positions, f));
            },
            py::arg("x"), py::arg("positions"), py::arg("head_dim"), py::arg("base") = 10000.0,
            py::arg("scale") = 1.0);

    // --- flow matching --------------------------------------------------------
    mod.def("time_grid", [](const std::string& kind, double shift, int n_steps) {
        return flow::time_grid(schedule_from_args(kind, shift, n_steps));
    }, py::arg("kind") = "shifted", py::arg("shift") = 3.0, py::arg("n_steps") = 30);
    mod.def("cfg_velocity",
            [](py::array_t<double> e_uncond, py::array_t<double> e_img, py::array_t<double> e_full,
               double w_image, double w_text) {
                return array_from_tensor(
                    flow::cfg_velocity(tensor_from_array(e_uncond), tensor_from_array(e_img),
                                       tensor_from_array(e_full), {w_image, w_text}));
            });
    mod.def("make_path_sample", [](py::array_t<double> x0, py::array_t<double> x1, double t) {
        const flow::PathSample s =
            flow::make_path_sample(tensor_from_array(x0), tensor_from_array(x1), t);
        py::dict d;
        d["x_t"] = array_from_tensor(s.x_t);
        d["u"] = array_from_tensor(s.u);
        d["t"] = s.t;
        return d;
    });
    mod.def("cfm_loss", [](py::array_t<double> v, py::array_t<double> u) {
        return flow::cfm_loss(tensor_from_array(v), tensor_from_array(u));
    });
    mod.def("dropout_conditions", [](RngState& rng) {
        const flow::DropoutDecision d = flow::dropout_conditions(rng);
        return py::make_tuple(d.keep_image, d.keep_text);
    });
    mod.def("integrate",
            [](const std::function<py::array_t<double>(py::array_t<double>, double)>& field,
               py::array_t<double> x0, const std::string& kind, double shift, int n_steps,
               const std::string& solver) {
                const flow::VelocityField wrapped = [&](const Tensor& x, double t, const Tensor*,
                                                        const Tensor*) {
                    return tensor_from_array(field(array_from_tensor(x), t));
                };
                const flow::IntegrateResult r =
                    flow::integrate(wrapped, tensor_from_array(x0),
                                    schedule_from_args(kind, shift, n_steps),
                                    solver_from_name(solver), {});
                return py::make_tuple(array_from_tensor(r.x), r.nfe);
            },
            py::arg("field"), py::arg("x0"), py::arg("kind") = "uniform", py::arg("shift") = 1.0,
            py::arg("n_steps") = 30, py::arg("solver") = "heun");

    // --- attention --------------------------------------------------------------
    mod.def("gated_fusion",
            [](py::array_t<double> q, py::array_t<double> k, py::array_t<double> v,
               py::array_t<double> k_text, py::array_t<double> v_text, py::array_t<double> k_cimg,
               py::array_t<double> v_cimg, const std::vector<std::pair<int, int>>& positions,
               double alpha_text, double alpha_cimg, double rope_base, double rope_scale) {
                attn::AttnInputs in;
                in.q_img = tensor_from_array(q);
                in.k_img = tensor_from_array(k);
                in.v_img = tensor_from_array(v);
                in.k_text = tensor_from_array(k_text);
                in.v_text = tensor_from_array(v_text);
                in.k_cimg = tensor_from_array(k_cimg);
                in.v_cimg = tensor_from_array(v_cimg);
                in.positions = positions;
                const auto freqs = anyres::ntk_rope_freqs(
                    static_cast<int>(in.q_img.shape[1]), rope_base, rope_scale);
                return array_from_tensor(
                    attn::gated_fusion(in, {alpha_text, alpha_cimg}, freqs));
            },
            py::arg("q"), py::arg("k"), py::arg("v"), py::arg("k_text"), py::arg("v_text"),
            py::arg("k_cimg"), py::arg("v_cimg"), py::arg("positions"),
            py::arg("alpha_text") = 0.0, py::arg("alpha_cimg") = 0.0,
            py::arg("rope_base") = 10000.0, py::arg("rope_scale") = 1.0);
    mod.def("mhgs_mask",
            [](py::array_t<double> scores, int k, double temperature, RngState& rng,
               const std::string& mode) {
                return array_from_tensor(attn::mhgs_mask(
                    tensor_from_array(scores), k, temperature, rng,
                    mode == "hard" ? attn::MhgsMode::hard : attn::MhgsMode::relaxed));
            },
            py::arg("scores"), py::arg("k"), py::arg("temperature"), py::arg("rng"),
            py::arg("mode") = "hard");
    mod.def("apply_token_mask", [](py::array_t<double> x, py::array_t<double> mask) {
        return array_from_tensor(
            attn::apply_token_mask(tensor_from_array(x), tensor_from_array(mask)));
    });

    // --- toy flow-matching demo ---------------------------------------------------
    py::class_<toy::VelocityMlp>(mod, "VelocityMlp")
        .def_readonly("hidden", &toy::VelocityMlp::hidden)
        .def_readonly("img_cond_dim", &toy::VelocityMlp::img_cond_dim);
    mod.def("toy_train",
            [](const std::vector<std::tuple<double, double, double, std::string>>& components,
               int steps, int batch_size, double learning_rate, uint64_t seed, int hidden) {
                toy::ToyDataset data;
                for (const auto& [mx, my, sd, label] : components) {
                    data.components.push_back({mx, my, sd, label});
                }
                RngState init{seed, 1};
                toy::VelocityMlp model =
                    toy::zero_init_extend(toy::make_mlp(2, 0, hidden, 16, init), 2);
                toy::TrainConfig cfg;
                cfg.steps = steps;
                cfg.batch_size = batch_size;
                cfg.learning_rate = learning_rate;
                cfg.seed = seed;
                toy::TrainResult r = toy::train(model, data, cfg);
                return py::make_tuple(r.model, r.loss_trace);
            },
            py::arg("components"), py::arg("steps") = 4000, py::arg("batch_size") = 128,
            py::arg("learning_rate") = 0.05, py::arg("seed") = 11, py::arg("hidden") = 64);
    mod.def("toy_sample",
            [](const toy::VelocityMlp& m, int n, const std::string& label, double w_image,
               double w_text, const std::string& solver, int n_steps, double shift, uint64_t seed) {
                RngState rng{seed, 0};
                const toy::SampleResult r = toy::sample(
                    m, n, label, {w_image, w_text}, solver_from_name(solver),
                    schedule_from_args(shift == 1.0 ? "uniform" : "shifted", shift, n_steps), rng);
                py::array_t<double> pts({static_cast<py::ssize_t>(r.points.size()),
                                         static_cast<py::ssize_t>(2)});
                for (size_t i = 0; i < r.points.size(); ++i) {
                    pts.mutable_at(i, 0) = r.points[i][0];
                    pts.mutable_at(i, 1) = r.points[i][1];
                }
                return py::make_tuple(pts, r.nfe_per_sample);
            },
            py::arg("model"), py::arg("n"), py::arg("label"), py::arg("w_image") = 1.0,
            py::arg("w_text") = 4.0, py::arg("solver") = "heun", py::arg("n_steps") = 15,
            py::arg("shift") = 3.0, py::arg("seed") = 0);

    // --- pipeline ---------------------------------------------------------------
    mod.def("render_instruction",
            [](const std::string& text, const std::map<std::string, std::string>& vars) {
                return pipeline::render_instruction({"", text, 0}, vars);
            });
    mod.def("stage1_plan",
            [](const std::vector<std::tuple<std::string,
                                            std::vector<std::pair<std::string, int>>, double>>& tasks,
               int target, uint64_t seed) {
                std::vector<pipeline::TaskRecord> records;
                for (const auto& [id, datasets, weight] : tasks) {
                    records.push_back({id, datasets, weight});
                }
                RngState rng{seed, 0};
                const pipeline::MixPlan plan = pipeline::stage1_plan(records, target, rng);
                return plan.per_task_totals;
            },
            py::arg("tasks"), py::arg("target") = 200, py::arg("seed") = 0);
    mod.def("stage2_plan",
            [](const std::vector<std::tuple<std::string,
                                            std::vector<std::pair<std::string, int>>, double>>& tasks,
               const std::string& t2i, uint64_t seed) {
                std::vector<pipeline::TaskRecord> records;
                for (const auto& [id, datasets, weight] : tasks) {
                    records.push_back({id, datasets, weight});
                }
                RngState rng{seed, 0};
                const pipeline::MixPlan plan = pipeline::stage2_plan(records, rng, t2i);
                return plan.per_task_totals;
            },
            py::arg("tasks"), py::arg("t2i") = "", py::arg("seed") = 0);
}
