#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "pixkit/rng.hpp"
#include "pixkit/tensor.hpp"

namespace pixkit::flow {

// Time convention, fixed repo-wide: t = 0 is noise, t = 1 is data, and the
// sampler integrates from 0 to 1. The straight-path target velocity is
// therefore u = x1 - x0, constant in t.

/// velocity network contract: (x, t, image condition or null, text condition
/// or null) -> velocity of x's shape
using VelocityField =
    std::function<Tensor(const Tensor& x, double t, const Tensor* cond_image,
                         const Tensor* cond_text)>;

struct Conditions {
    const Tensor* image = nullptr;
    const Tensor* text = nullptr;
};

struct PathSample {
    Tensor x0;   // noise endpoint
    Tensor x1;   // data endpoint
    double t;
    Tensor x_t;  // (1-t)*x0 + t*x1
    Tensor u;    // x1 - x0
};

/// linear interpolation path sample; shapes must match and t must be in [0,1]
PathSample make_path_sample(const Tensor& x0, const Tensor& x1, double t);

/// mean squared error over all elements
double cfm_loss(const Tensor& v_pred, const Tensor& u);

/// d(cfm_loss)/d(v_pred) = 2*(v_pred - u)/numel
Tensor cfm_loss_grad(const Tensor& v_pred, const Tensor& u);

struct Schedule {
    enum class Kind { uniform, shifted };
    Kind kind = Kind::uniform;
    double shift = 3.0;  // only used by shifted
    int n_steps = 30;
};

/// n_steps+1 strictly increasing knots from 0 to 1. Uniform: k/n. Shifted:
/// t' = s*t/(1+(s-1)*t) applied to the uniform grid; s = 1 reproduces the
/// uniform grid.
std::vector<double> time_grid(const Schedule& s);

struct CfgWeights {
    double w_image = 1.0;
    double w_text = 1.0;
};

/// Two-condition guidance combination
///   e_uncond + w_image*(e_img_only - e_uncond) + w_text*(e_full - e_img_only)
/// evaluated elementwise. Weights (1,1) return e_full and (1,0) return
/// e_img_only exactly (the telescoped identities), so guidance-off paths are
/// bit-equal to the plain conditional evaluation.
Tensor cfg_velocity(const Tensor& e_uncond, const Tensor& e_img_only, const Tensor& e_full,
                    const CfgWeights& w);

enum class SolverKind { euler, heun, midpoint };

// single steps; f is the already-conditioned velocity (x, t) -> v
using BoundField = std::function<Tensor(const Tensor&, double)>;
Tensor step_euler(const BoundField& f, const Tensor& x, double t, double dt);
Tensor step_heun(const BoundField& f, const Tensor& x, double t, double dt);
Tensor step_midpoint(const BoundField& f, const Tensor& x, double t, double dt);

struct IntegrateResult {
    Tensor x;
    int nfe = 0;  // velocity-field evaluations, including the x3 CFG factor
};

/// Sequential solver steps over the schedule grid. With cfg set, every
/// evaluation point runs the field three ways (unconditional, image-only,
/// full) and combines them with cfg_velocity; NFE is counted accordingly
/// (Euler n, Heun/Midpoint 2n, times 3 under CFG). Non-finite field output
/// is an error.
IntegrateResult integrate(const VelocityField& field, Tensor x0, const Schedule& schedule,
                          SolverKind solver, const Conditions& conds,
                          const std::optional<CfgWeights>& cfg = std::nullopt);

struct DropoutDecision {
    bool keep_image = true;
    bool keep_text = true;
};

/// Condition dropout for guidance training: image only, text only, or both
/// dropped with probability 0.05 each; both kept otherwise (0.85). One
/// uniform draw per call.
DropoutDecision dropout_conditions(RngState& rng);

/// same partition with explicit rates
DropoutDecision dropout_conditions(RngState& rng, double p_image, double p_text, double p_both);

}  // namespace pixkit::flow
