#pragma once

#include <Eigen/Dense>
#include <vector>

#include "authfp/rng.hpp"

namespace authfp {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class Activation { LeakyRelu, Tanh, Identity };

constexpr double kLeakySlope = 0.2;

struct Layer {
    Mat weights;  // out_dim x in_dim
    Vec bias;     // out_dim
    Activation activation = Activation::Identity;

    int in_dim() const { return static_cast<int>(weights.cols()); }
    int out_dim() const { return static_cast<int>(weights.rows()); }
};

/// Fully connected network. Layer dimensions must chain:
/// out_dim(i) == in_dim(i+1).
struct NetworkParams {
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

    /// Throws ShapeError if the layer dimensions do not chain.
    void check_consistent() const;
};

struct LayerGrads {
    Mat weights;
    Vec bias;
};

struct NetworkGrads {
    std::vector<LayerGrads> layers;
};

/// Hidden-layer shape d -> hidden[0] -> ... -> l with LeakyReLU(0.2) hidden
/// activations and identity output. Weights ~ N(0, 2/fan_in), biases zero.
NetworkParams make_mlp(int input_dim, const std::vector<int>& hidden_widths, int output_dim,
                       Rng& rng);

/// Single-sample forward pass.
Vec forward(const NetworkParams& params, const Eigen::Ref<const Vec>& input);

/// Batched forward pass; inputs are columns of `inputs` (in_dim x batch).
Mat forward_batch(const NetworkParams& params, const Eigen::Ref<const Mat>& inputs);

/// Intermediate values of a batched forward pass, kept for backprop.
/// activations[0] is the input batch; activations[k] the output of layer k-1.
/// Preactivations are not stored: every supported activation has a
/// derivative expressible through its output value.
struct ForwardTrace {
    std::vector<Mat> activations;
};

ForwardTrace forward_trace(const NetworkParams& params, const Eigen::Ref<const Mat>& inputs);

/// Same, reusing the buffers already held by `trace`.
void forward_trace_into(const NetworkParams& params, const Eigen::Ref<const Mat>& inputs,
                        ForwardTrace& trace);

/// Vector-Jacobian product: given dLoss/dOutput for every sample in the
/// trace, accumulates parameter gradients and returns dLoss/dInput.
/// This is the single backprop routine every loss in the project rides on.
Mat backward(const NetworkParams& params, const ForwardTrace& trace,
             const Eigen::Ref<const Mat>& output_cotangent, NetworkGrads& grads);

/// Mean over the batch of (1/l)*||forward(x_i) - target_i||^2 and its exact
/// analytic gradients with respect to every weight and bias.
/// Columns of `inputs` / `targets` are the batch samples.
std::pair<double, NetworkGrads> loss_and_grads(const NetworkParams& params,
                                               const Eigen::Ref<const Mat>& inputs,
                                               const Eigen::Ref<const Mat>& targets);

/// Buffers reused across training steps. Keeping the large intermediates at
/// stable addresses roughly halves the step cost against fresh allocations.
struct TrainScratch {
    ForwardTrace trace;
    Mat residual;
    Mat delta;
    Mat upstream;
};

/// Workspace variant of loss_and_grads for the training hot loop; identical
/// arithmetic, gradients land in `grads`, and no input gradient is formed.
double loss_and_grads(const NetworkParams& params, const Eigen::Ref<const Mat>& inputs,
                      const Eigen::Ref<const Mat>& targets, NetworkGrads& grads,
                      TrainScratch& scratch);

/// Parameter gradients for an arbitrary loss given dLoss/dOutput; skips the
/// input gradient and reuses scratch buffers.
void backward_params(const NetworkParams& params, const ForwardTrace& trace,
                     const Eigen::Ref<const Mat>& output_cotangent, NetworkGrads& grads,
                     TrainScratch& scratch);

/// Exact gradient of (1/l)*||forward(input) - target||^2 w.r.t. the input.
Vec input_gradient(const NetworkParams& params, const Eigen::Ref<const Vec>& input,
                   const Eigen::Ref<const Vec>& target);

/// dLoss/dInput for a single sample given dLoss/dOutput at the output layer.
Vec input_vjp(const NetworkParams& params, const Eigen::Ref<const Vec>& input,
              const Eigen::Ref<const Vec>& output_cotangent);

}  // namespace authfp
