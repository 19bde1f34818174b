#include "pixkit/toymodel.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "pixkit/tsr.hpp"

namespace pixkit::toy {

using nlohmann::json;

static Tensor xavier(RngState& rng, size_t rows, size_t cols) {
    Tensor t({rows, cols});
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : t.data) v = (rng.next_uniform() * 2.0 - 1.0) * bound;
    return t;
}

VelocityMlp make_mlp(int x_dim, int img_cond_dim, int hidden, int mod_dim, RngState& rng) {
    if (x_dim < 1 || img_cond_dim < 0 || hidden < 1 || mod_dim < 2 || mod_dim % 2 != 0) {
        throw std::invalid_argument("make_mlp: bad dimensions");
    }
    VelocityMlp m;
    m.x_dim = x_dim;
    m.img_cond_dim = img_cond_dim;
    m.hidden = hidden;
    m.mod_dim = mod_dim;
    m.w_in = xavier(rng, hidden, static_cast<size_t>(x_dim + img_cond_dim));
    m.b_in = Tensor::zeros({static_cast<size_t>(hidden)});
    m.w_scale = Tensor::zeros({static_cast<size_t>(hidden), static_cast<size_t>(mod_dim)});
    m.w_shift = Tensor::zeros({static_cast<size_t>(hidden), static_cast<size_t>(mod_dim)});
    m.w_out = xavier(rng, static_cast<size_t>(x_dim), hidden);
    m.b_out = Tensor::zeros({static_cast<size_t>(x_dim)});
    return m;
}

Tensor time_embedding(double t, int dim) {
    if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("time_embedding: dim must be even");
    Tensor e({static_cast<size_t>(dim)});
    // linear frequency ladder; the velocity target is smooth in t, so low
    // frequencies carry the signal
    for (int j = 0; j < dim / 2; ++j) {
        const double w = M_PI * (j + 1);
        e.data[2 * j] = std::sin(w * t);
        e.data[2 * j + 1] = std::cos(w * t);
    }
    return e;
}

Tensor class_embedding(const std::string& label, int dim) {
    // FNV-1a over the label seeds a fixed direction
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    RngState rng{h, 0};
    Tensor e = sample_gaussian(rng, {static_cast<size_t>(dim)});
    double norm = 0.0;
    for (double v : e.data) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : e.data) v = 0.25 * v / norm;
    return e;
}

Tensor make_image_hint(const Tensor& x1, RngState& rng, double hint_noise) {
    Tensor h = x1;
    for (double& v : h.data) v += hint_noise * sample_gaussian_scalar(rng);
    return h;
}

// shared forward pass that optionally captures intermediates for backprop
namespace {
struct ForwardTrace {
    Tensor z;       // concatenated input
    Tensor h;       // tanh activations
    Tensor e;       // modulation input
    Tensor sc, sh;  // scale, shift
    Tensor hm;      // modulated hidden
    Tensor out;
};

ForwardTrace run_forward(const VelocityMlp& m, const Tensor& x, double t,
                         const Tensor* cond_image, const Tensor* cond_text) {
    if (x.numel() != static_cast<size_t>(m.x_dim)) {
        throw std::invalid_argument("forward: x width mismatch");
    }
    if (cond_image && cond_image->numel() != static_cast<size_t>(m.img_cond_dim)) {
        throw std::invalid_argument("forward: image condition width mismatch");
    }
    if (cond_text && cond_text->numel() != static_cast<size_t>(m.mod_dim)) {
        throw std::invalid_argument("forward: text condition width mismatch");
    }
    ForwardTrace f;
    f.z = Tensor::zeros({static_cast<size_t>(m.in_dim())});
    for (int i = 0; i < m.x_dim; ++i) f.z.data[i] = x.data[i];
    if (cond_image) {
        for (int i = 0; i < m.img_cond_dim; ++i) f.z.data[m.x_dim + i] = cond_image->data[i];
    }
    f.h = Tensor::zeros({static_cast<size_t>(m.hidden)});
    for (int i = 0; i < m.hidden; ++i) {
        double s = m.b_in.data[i];
        for (int k = 0; k < m.in_dim(); ++k) s += m.w_in.at(i, k) * f.z.data[k];
        f.h.data[i] = std::tanh(s);
    }
    f.e = time_embedding(t, m.mod_dim);
    if (cond_text) {
        for (int k = 0; k < m.mod_dim; ++k) f.e.data[k] += cond_text->data[k];
    }
    f.sc = Tensor::zeros({static_cast<size_t>(m.hidden)});
    f.sh = Tensor::zeros({static_cast<size_t>(m.hidden)});
    f.hm = Tensor::zeros({static_cast<size_t>(m.hidden)});
    for (int i = 0; i < m.hidden; ++i) {
        double sc = 1.0, sh = 0.0;
        for (int k = 0; k < m.mod_dim; ++k) {
            sc += m.w_scale.at(i, k) * f.e.data[k];
            sh += m.w_shift.at(i, k) * f.e.data[k];
        }
        f.sc.data[i] = sc;
        f.sh.data[i] = sh;
        f.hm.data[i] = sc * f.h.data[i] + sh;
    }
    f.out = Tensor::zeros({static_cast<size_t>(m.x_dim)});
    for (int o = 0; o < m.x_dim; ++o) {
        double s = m.b_out.data[o];
        for (int i = 0; i < m.hidden; ++i) s += m.w_out.at(o, i) * f.hm.data[i];
        f.out.data[o] = s;
    }
    return f;
}
}  // namespace

Tensor forward(const VelocityMlp& m, const Tensor& x, double t, const Tensor* cond_image,
               const Tensor* cond_text) {
    return run_forward(m, x, t, cond_image, cond_text).out;
}

Gradients backward(const VelocityMlp& m, const std::vector<BatchSample>& batch) {
    if (batch.empty()) throw std::invalid_argument("backward: empty batch");
    Gradients g;
    g.w_in = Tensor::zeros(m.w_in.shape);
    g.b_in = Tensor::zeros(m.b_in.shape);
    g.w_scale = Tensor::zeros(m.w_scale.shape);
    g.w_shift = Tensor::zeros(m.w_shift.shape);
    g.w_out = Tensor::zeros(m.w_out.shape);
    g.b_out = Tensor::zeros(m.b_out.shape);

    const double inv = 1.0 / (static_cast<double>(batch.size()) * m.x_dim);
    for (const BatchSample& s : batch) {
        const Tensor* ci = s.cond_image ? &*s.cond_image : nullptr;
        const Tensor* ct = s.cond_text ? &*s.cond_text : nullptr;
        const ForwardTrace f = run_forward(m, s.x_t, s.t, ci, ct);
        // loss contribution and d loss / d out
        Tensor d_out({static_cast<size_t>(m.x_dim)});
        for (int o = 0; o < m.x_dim; ++o) {
            const double diff = f.out.data[o] - s.u.data[o];
            g.loss += diff * diff * inv;
            d_out.data[o] = 2.0 * diff * inv;
        }
        // output layer
        Tensor d_hm({static_cast<size_t>(m.hidden)});
        for (int o = 0; o < m.x_dim; ++o) {
            g.b_out.data[o] += d_out.data[o];
            for (int i = 0; i < m.hidden; ++i) {
                g.w_out.at(o, i) += d_out.data[o] * f.hm.data[i];
                d_hm.data[i] += m.w_out.at(o, i) * d_out.data[o];
            }
        }
        // modulation: hm = sc*h + sh
        for (int i = 0; i < m.hidden; ++i) {
            const double d_sc = d_hm.data[i] * f.h.data[i];
            const double d_sh = d_hm.data[i];
            for (int k = 0; k < m.mod_dim; ++k) {
                g.w_scale.at(i, k) += d_sc * f.e.data[k];
                g.w_shift.at(i, k) += d_sh * f.e.data[k];
            }
        }
        // input layer: h = tanh(w_in z + b_in)
        for (int i = 0; i < m.hidden; ++i) {
            const double d_pre = d_hm.data[i] * f.sc.data[i] * (1.0 - f.h.data[i] * f.h.data[i]);
            g.b_in.data[i] += d_pre;
            for (int k = 0; k < m.in_dim(); ++k) {
                g.w_in.at(i, k) += d_pre * f.z.data[k];
            }
        }
    }
    if (!std::isfinite(g.loss)) throw std::runtime_error("backward: non-finite loss");
    return g;
}

std::pair<Tensor, size_t> ToyDataset::draw(RngState& rng) const {
    if (components.empty()) throw std::invalid_argument("ToyDataset: no components");
    const size_t idx = rng.next_below(components.size());
    const MixtureComponent& c = components[idx];
    if (!(c.stddev > 0.0)) throw std::invalid_argument("ToyDataset: stddev must be > 0");
    Tensor p = Tensor::vec({c.mean_x + c.stddev * sample_gaussian_scalar(rng),
                            c.mean_y + c.stddev * sample_gaussian_scalar(rng)});
    return {p, idx};
}

TrainResult train(VelocityMlp m, const ToyDataset& data, const TrainConfig& cfg) {
    if (cfg.steps < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0)) {
        throw std::invalid_argument("train: bad config");
    }
    const double p_i = cfg.p_drop_image, p_t = cfg.p_drop_text, p_b = cfg.p_drop_both;
    if (p_i < 0 || p_t < 0 || p_b < 0 || p_i + p_t + p_b > 1.0) {
        throw std::invalid_argument("train: bad dropout rates");
    }
    RngState rng{cfg.seed, 0};
    TrainResult result;
    result.loss_trace.reserve(cfg.steps);
    for (int step = 0; step < cfg.steps; ++step) {
        std::vector<BatchSample> batch;
        batch.reserve(cfg.batch_size);
        for (int b = 0; b < cfg.batch_size; ++b) {
            auto [x1, comp] = data.draw(rng);
            Tensor hint = make_image_hint(x1, rng);
            Tensor x0 = sample_gaussian(rng, {static_cast<size_t>(m.x_dim)});
            const double t = rng.next_uniform();
            flow::PathSample path = flow::make_path_sample(x0, x1, t);
            BatchSample s;
            s.x_t = std::move(path.x_t);
            s.t = t;
            s.u = std::move(path.u);
            const flow::DropoutDecision drop = flow::dropout_conditions(rng, p_i, p_t, p_b);
            if (drop.keep_image) s.cond_image = std::move(hint);
            if (drop.keep_text) s.cond_text = class_embedding(data.components[comp].label, m.mod_dim);
            batch.push_back(std::move(s));
        }
        Gradients g = backward(m, batch);
        if (!std::isfinite(g.loss)) {
            throw std::runtime_error("train: diverged at step " + std::to_string(step));
        }
        const double lr = cfg.learning_rate;
        for (size_t i = 0; i < m.w_in.data.size(); ++i) m.w_in.data[i] -= lr * g.w_in.data[i];
        for (size_t i = 0; i < m.b_in.data.size(); ++i) m.b_in.data[i] -= lr * g.b_in.data[i];
        for (size_t i = 0; i < m.w_scale.data.size(); ++i) m.w_scale.data[i] -= lr * g.w_scale.data[i];
        for (size_t i = 0; i < m.w_shift.data.size(); ++i) m.w_shift.data[i] -= lr * g.w_shift.data[i];
        for (size_t i = 0; i < m.w_out.data.size(); ++i) m.w_out.data[i] -= lr * g.w_out.data[i];
        for (size_t i = 0; i < m.b_out.data.size(); ++i) m.b_out.data[i] -= lr * g.b_out.data[i];
        result.loss_trace.push_back(g.loss);
    }
    result.model = std::move(m);
    return result;
}

SampleResult sample(const VelocityMlp& m, int n, const std::string& label,
                    const flow::CfgWeights& w, flow::SolverKind solver,
                    const flow::Schedule& schedule, RngState& rng, const Tensor* image_hint) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    const Tensor text = class_embedding(label, m.mod_dim);
    flow::VelocityField field = [&](const Tensor& x, double t, const Tensor* ci,
                                    const Tensor* ct) { return forward(m, x, t, ci, ct); };
    flow::Conditions conds{image_hint, &text};
    SampleResult out;
    out.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        Tensor x0 = sample_gaussian(rng, {static_cast<size_t>(m.x_dim)});
        flow::IntegrateResult r = flow::integrate(field, std::move(x0), schedule, solver, conds, w);
        out.points.push_back({r.x.data[0], r.x.data[1]});
        out.nfe_per_sample = r.nfe;
    }
    return out;
}

VelocityMlp zero_init_extend(const VelocityMlp& m, int extra_input_dim) {
    if (extra_input_dim < 0) throw std::invalid_argument("zero_init_extend: negative extension");
    if (extra_input_dim == 0) return m;
    VelocityMlp out = m;
    out.img_cond_dim = m.img_cond_dim + extra_input_dim;
    out.w_in = Tensor::zeros({static_cast<size_t>(m.hidden), static_cast<size_t>(out.in_dim())});
    for (int i = 0; i < m.hidden; ++i) {
        for (int k = 0; k < m.in_dim(); ++k) out.w_in.at(i, k) = m.w_in.at(i, k);
        // new columns stay exactly zero
    }
    return out;
}

void save_checkpoint(const VelocityMlp& m, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::vector<std::pair<std::string, const Tensor*>> tensors = {
        {"w_in", &m.w_in},       {"b_in", &m.b_in},   {"w_scale", &m.w_scale},
        {"w_shift", &m.w_shift}, {"w_out", &m.w_out}, {"b_out", &m.b_out}};
    json manifest = {{"x_dim", m.x_dim},
                     {"img_cond_dim", m.img_cond_dim},
                     {"hidden", m.hidden},
                     {"mod_dim", m.mod_dim},
                     {"tensors", json::object()}};
    for (const auto& [name, t] : tensors) {
        const std::string file = name + ".tsr";
        save_tsr(*t, dir / file);
        manifest["tensors"][name] = file;
    }
    std::ofstream f(dir / "manifest.json");
    if (!f) throw std::runtime_error("save_checkpoint: cannot write manifest");
    f << manifest.dump(2) << "\n";
}

VelocityMlp load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw std::runtime_error("load_checkpoint: missing manifest in " + dir.string());
    json manifest = json::parse(f);
    VelocityMlp m;
    m.x_dim = manifest.at("x_dim").get<int>();
    m.img_cond_dim = manifest.at("img_cond_dim").get<int>();
    m.hidden = manifest.at("hidden").get<int>();
    m.mod_dim = manifest.at("mod_dim").get<int>();
    const auto& files = manifest.at("tensors");
    m.w_in = load_tsr(dir / files.at("w_in").get<std::string>());
    m.b_in = load_tsr(dir / files.at("b_in").get<std::string>());
    m.w_scale = load_tsr(dir / files.at("w_scale").get<std::string>());
    m.w_shift = load_tsr(dir / files.at("w_shift").get<std::string>());
    m.w_out = load_tsr(dir / files.at("w_out").get<std::string>());
    m.b_out = load_tsr(dir / files.at("b_out").get<std::string>());
    return m;
}

}  // namespace pixkit::toy
