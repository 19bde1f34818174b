#include "pixkit/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace pixkit::flow {

PathSample make_path_sample(const Tensor& x0, const Tensor& x1, double t) {
    if (!x0.same_shape(x1)) throw std::invalid_argument("make_path_sample: shape mismatch");
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("make_path_sample: t out of [0,1]");
    PathSample s;
    s.x0 = x0;
    s.x1 = x1;
    s.t = t;
    s.x_t = Tensor(x0.shape);
    s.u = Tensor(x0.shape);
    for (size_t i = 0; i < x0.numel(); ++i) {
        s.x_t.data[i] = (1.0 - t) * x0.data[i] + t * x1.data[i];
        s.u.data[i] = x1.data[i] - x0.data[i];
    }
    return s;
}

double cfm_loss(const Tensor& v_pred, const Tensor& u) {
    if (!v_pred.same_shape(u)) throw std::invalid_argument("cfm_loss: shape mismatch");
    double total = 0.0;
    for (size_t i = 0; i < u.numel(); ++i) {
        const double d = v_pred.data[i] - u.data[i];
        total += d * d;
    }
    return total / static_cast<double>(u.numel());
}

Tensor cfm_loss_grad(const Tensor& v_pred, const Tensor& u) {
    if (!v_pred.same_shape(u)) throw std::invalid_argument("cfm_loss_grad: shape mismatch");
    Tensor g(u.shape);
    const double inv_n = 1.0 / static_cast<double>(u.numel());
    for (size_t i = 0; i < u.numel(); ++i) {
        g.data[i] = 2.0 * (v_pred.data[i] - u.data[i]) * inv_n;
    }
    return g;
}

std::vector<double> time_grid(const Schedule& s) {
    if (s.n_steps < 1) throw std::invalid_argument("time_grid: n_steps must be >= 1");
    if (s.kind == Schedule::Kind::shifted && !(s.shift > 0.0)) {
        throw std::invalid_argument("time_grid: shift must be > 0");
    }
    std::vector<double> grid(s.n_steps + 1);
    for (int k = 0; k <= s.n_steps; ++k) {
        const double t = static_cast<double>(k) / s.n_steps;
        grid[k] = (s.kind == Schedule::Kind::uniform)
                      ? t
                      : (s.shift * t) / (1.0 + (s.shift - 1.0) * t);
    }
    grid.front() = 0.0;
    grid.back() = 1.0;
    return grid;
}

Tensor cfg_velocity(const Tensor& e_uncond, const Tensor& e_img_only, const Tensor& e_full,
                    const CfgWeights& w) {
    if (!e_uncond.same_shape(e_img_only) || !e_uncond.same_shape(e_full)) {
        throw std::invalid_argument("cfg_velocity: shape mismatch");
    }
    if (w.w_image == 1.0 && w.w_text == 1.0) return e_full;
    if (w.w_image == 1.0 && w.w_text == 0.0) return e_img_only;
    Tensor out(e_uncond.shape);
    for (size_t i = 0; i < out.numel(); ++i) {
        out.data[i] = e_uncond.data[i] + w.w_image * (e_img_only.data[i] - e_uncond.data[i]) +
                      w.w_text * (e_full.data[i] - e_img_only.data[i]);
    }
    return out;
}

static void check_step(const Tensor& v, const Tensor& x, const char* op) {
    if (!v.same_shape(x)) throw std::runtime_error(std::string(op) + ": field output shape mismatch");
    if (!v.all_finite()) throw std::runtime_error(std::string(op) + ": non-finite field output");
}

Tensor step_euler(const BoundField& f, const Tensor& x, double t, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_euler: dt must be > 0");
    Tensor v = f(x, t);
    check_step(v, x, "step_euler");
    return axpy(dt, v, x);
}

Tensor step_heun(const BoundField& f, const Tensor& x, double t, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_heun: dt must be > 0");
    Tensor k1 = f(x, t);
    check_step(k1, x, "step_heun");
    Tensor k2 = f(axpy(dt, k1, x), t + dt);
    check_step(k2, x, "step_heun");
    Tensor out = x;
    for (size_t i = 0; i < out.numel(); ++i) {
        out.data[i] += dt * 0.5 * (k1.data[i] + k2.data[i]);
    }
    return out;
}

Tensor step_midpoint(const BoundField& f, const Tensor& x, double t, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_midpoint: dt must be > 0");
    Tensor k1 = f(x, t);
    check_step(k1, x, "step_midpoint");
    Tensor k2 = f(axpy(dt * 0.5, k1, x), t + dt * 0.5);
    check_step(k2, x, "step_midpoint");
    return axpy(dt, k2, x);
}

IntegrateResult integrate(const VelocityField& field, Tensor x0, const Schedule& schedule,
                          SolverKind solver, const Conditions& conds,
                          const std::optional<CfgWeights>& cfg) {
    const std::vector<double> grid = time_grid(schedule);
    int nfe = 0;
    BoundField bound = [&](const Tensor& x, double t) -> Tensor {
        if (!cfg) {
            ++nfe;
            return field(x, t, conds.image, conds.text);
        }
        nfe += 3;
        Tensor e_uncond = field(x, t, nullptr, nullptr);
        Tensor e_img = field(x, t, conds.image, nullptr);
        Tensor e_full = field(x, t, conds.image, conds.text);
        return cfg_velocity(e_uncond, e_img, e_full, *cfg);
    };
    Tensor x = std::move(x0);
    for (size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t = grid[k];
        const double dt = grid[k + 1] - grid[k];
        switch (solver) {
            case SolverKind::euler: x = step_euler(bound, x, t, dt); break;
            case SolverKind::heun: x = step_heun(bound, x, t, dt); break;
            case SolverKind::midpoint: x = step_midpoint(bound, x, t, dt); break;
        }
    }
    return {std::move(x), nfe};
}

DropoutDecision dropout_conditions(RngState& rng) {
    return dropout_conditions(rng, 0.05, 0.05, 0.05);
}

DropoutDecision dropout_conditions(RngState& rng, double p_image, double p_text, double p_both) {
    if (p_image < 0.0 || p_text < 0.0 || p_both < 0.0 || p_image + p_text + p_both > 1.0) {
        throw std::invalid_argument("dropout_conditions: bad rates");
    }
    const double u = rng.next_uniform();
    if (u < p_image) return {false, true};
    if (u < p_image + p_text) return {true, false};
    if (u < p_image + p_text + p_both) return {false, false};
    return {true, true};
}

}  // namespace pixkit::flow
