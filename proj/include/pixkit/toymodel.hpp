#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pixkit/flow.hpp"
#include "pixkit/rng.hpp"
#include "pixkit/tensor.hpp"

namespace pixkit::toy {

// Small velocity network for 2D flow matching:
//   hidden = tanh(W_in [x; c_img] + b_in)
//   (scale, shift) = (1 + W_scale e, W_shift e),  e = time_emb(t) + c_text
//   v = W_out (scale .* hidden + shift) + b_out
// Conditioning mirrors the full model: the image condition enters through
// input channels (extendable with zero-init weights), the text condition
// through scale/shift modulation alongside the timestep embedding.
// Modulation weights start at zero, so scale is 1 and shift is 0 at init.
struct VelocityMlp {
    int x_dim = 2;
    int img_cond_dim = 0;
    int hidden = 64;
    int mod_dim = 16;  // time embedding width == text embedding width

    Tensor w_in, b_in;        // hidden x (x_dim+img_cond_dim), hidden
    Tensor w_scale, w_shift;  // hidden x mod_dim, zero-initialized
    Tensor w_out, b_out;      // x_dim x hidden, x_dim

    int in_dim() const { return x_dim + img_cond_dim; }
};

/// random input/output layers, zero modulation, zero biases
VelocityMlp make_mlp(int x_dim, int img_cond_dim, int hidden, int mod_dim, RngState& rng);

/// sinusoidal features sin/cos(2*pi*2^j*t), j = 0..dim/2-1
Tensor time_embedding(double t, int dim);

/// Deterministic fixed embedding for a class label (not trained). The norm
/// is kept small (0.25) so the label acts as a soft steering signal that
/// guidance weights can meaningfully amplify.
Tensor class_embedding(const std::string& label, int dim);

/// the training-time image condition: a noisy 2D view of the data point
/// (hint = x1 + hint_noise * gauss), standing in for the degraded/conditional
/// input image of an image-to-image task
Tensor make_image_hint(const Tensor& x1, RngState& rng, double hint_noise = 1.0);

/// null conditions are the zero vector; pass nullptr for a dropped condition
Tensor forward(const VelocityMlp& m, const Tensor& x, double t, const Tensor* cond_image,
               const Tensor* cond_text);

struct BatchSample {
    Tensor x_t;  // interpolant, x_dim
    double t = 0.0;
    Tensor u;    // target velocity, x_dim
    std::optional<Tensor> cond_image;
    std::optional<Tensor> cond_text;
};

struct Gradients {
    Tensor w_in, b_in, w_scale, w_shift, w_out, b_out;
    double loss = 0.0;
};

/// analytic reverse-mode gradients of the mean CFM loss over the batch
Gradients backward(const VelocityMlp& m, const std::vector<BatchSample>& batch);

struct MixtureComponent {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double stddev = 1.0;
    std::string label;
};

struct ToyDataset {
    std::vector<MixtureComponent> components;  // drawn uniformly

    std::pair<Tensor, size_t> draw(RngState& rng) const;  // (point, component index)
};

struct TrainConfig {
    int steps = 4000;
    int batch_size = 128;
    double learning_rate = 0.05;
    double p_drop_image = 0.05;
    double p_drop_text = 0.05;
    double p_drop_both = 0.05;
    uint64_t seed = 0;
};

struct TrainResult {
    VelocityMlp model;
    std::vector<double> loss_trace;  // one entry per step
};

/// Plain SGD on the CFM objective with condition dropout. Deterministic
/// given the seed; a non-finite loss aborts with the step index.
TrainResult train(VelocityMlp m, const ToyDataset& data, const TrainConfig& cfg);

struct SampleResult {
    std::vector<std::array<double, 2>> points;
    int nfe_per_sample = 0;  // field evaluations for one ODE chain
};

/// Draws n points for the given class label: Gaussian noise pushed through
/// the ODE with three-way CFG (unconditional / image-only / image+label).
/// image_hint is the conditional-image vector to sample under (typically the
/// component mean); null means the empty condition.
SampleResult sample(const VelocityMlp& m, int n, const std::string& label,
                    const flow::CfgWeights& w, flow::SolverKind solver,
                    const flow::Schedule& schedule, RngState& rng,
                    const Tensor* image_hint = nullptr);

/// widens the input layer by extra zero-weight image-condition channels; the
/// extended model computes exactly the original outputs until trained
VelocityMlp zero_init_extend(const VelocityMlp& m, int extra_input_dim);

void save_checkpoint(const VelocityMlp& m, const std::filesystem::path& dir);
VelocityMlp load_checkpoint(const std::filesystem::path& dir);

}  // namespace pixkit::toy
