#include "authfp/network.hpp"

#include <cmath>
#include <string>

#include "authfp/errors.hpp"

namespace authfp {
namespace {

void apply_activation(Activation act, Mat& z) {
    switch (act) {
        case Activation::LeakyRelu:
            z = z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
            break;
        case Activation::Tanh:
            z = z.array().tanh().matrix();
            break;
        case Activation::Identity:
            break;
    }
}

// Multiplies `delta` in place by the activation derivative, expressed
// through the activation value a: leaky-relu shares the sign of its
// preactivation, and tanh' = 1 - a^2.
void scale_by_activation_derivative(Activation act, const Mat& a, Mat& delta) {
    switch (act) {
        case Activation::LeakyRelu:
            delta = delta.binaryExpr(
                a, [](double d, double v) { return v > 0.0 ? d : kLeakySlope * d; });
            break;
        case Activation::Tanh:
            delta.array() *= 1.0 - a.array().square();
            break;
        case Activation::Identity:
            break;
    }
}

void check_input_dim(const NetworkParams& params, Eigen::Index rows) {
    if (rows != params.input_dim()) {
        throw ShapeError("network input dim mismatch: expected " +
                         std::to_string(params.input_dim()) + ", got " + std::to_string(rows));
    }
}

}  // namespace

void NetworkParams::check_consistent() const {
    for (size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].bias.size() != layers[i].out_dim()) {
            throw ShapeError("layer " + std::to_string(i) + " bias size " +
                             std::to_string(layers[i].bias.size()) + " != out dim " +
                             std::to_string(layers[i].out_dim()));
        }
        if (i + 1 < layers.size() && layers[i].out_dim() != layers[i + 1].in_dim()) {
            throw ShapeError("layer dims do not chain at layer " + std::to_string(i) + ": " +
                             std::to_string(layers[i].out_dim()) + " -> " +
                             std::to_string(layers[i + 1].in_dim()));
        }
    }
}

NetworkParams make_mlp(int input_dim, const std::vector<int>& hidden_widths, int output_dim,
                       Rng& rng) {
    NetworkParams params;
    std::vector<int> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden_widths.begin(), hidden_widths.end());
    dims.push_back(output_dim);
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer layer;
        const int in = dims[i], out = dims[i + 1];
        const double std_dev = std::sqrt(2.0 / in);
        layer.weights = Mat::NullaryExpr(out, in, [&]() { return std_dev * rng.next_gaussian(); });
        layer.bias = Vec::Zero(out);
        layer.activation =
            (i + 2 == dims.size()) ? Activation::Identity : Activation::LeakyRelu;
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Mat forward_batch(const NetworkParams& params, const Eigen::Ref<const Mat>& inputs) {
    check_input_dim(params, inputs.rows());
    Mat a = inputs;
    for (const Layer& layer : params.layers) {
        Mat z = layer.weights * a;
        z.colwise() += layer.bias;
        apply_activation(layer.activation, z);
        a = std::move(z);
    }
    return a;
}

Vec forward(const NetworkParams& params, const Eigen::Ref<const Vec>& input) {
    return forward_batch(params, input);
}

void forward_trace_into(const NetworkParams& params, const Eigen::Ref<const Mat>& inputs,
                        ForwardTrace& trace) {
    check_input_dim(params, inputs.rows());
    trace.activations.resize(params.layers.size() + 1);
    trace.activations[0] = inputs;
    for (size_t i = 0; i < params.layers.size(); ++i) {
        Mat& z = trace.activations[i + 1];
        z.noalias() = params.layers[i].weights * trace.activations[i];
        z.colwise() += params.layers[i].bias;
        apply_activation(params.layers[i].activation, z);
    }
}

namespace {

// Shared backprop loop. `delta` must arrive pre-scaled by the output
// activation derivative; when `input_gradient` is null the layer-0 upstream
// product is skipped entirely.
void backward_impl(const NetworkParams& params, const ForwardTrace& trace, NetworkGrads& grads,
                   Mat& delta, Mat& upstream, Mat* input_gradient) {
    const auto n_layers = params.layers.size();
    grads.layers.resize(n_layers);
    for (size_t k = n_layers; k-- > 0;) {
        grads.layers[k].weights.noalias() = delta * trace.activations[k].transpose();
        grads.layers[k].bias.noalias() = delta.rowwise().sum();
        if (k == 0) {
            if (input_gradient) {
                input_gradient->noalias() = params.layers[0].weights.transpose() * delta;
            }
            return;
        }
        upstream.noalias() = params.layers[k].weights.transpose() * delta;
        scale_by_activation_derivative(params.layers[k - 1].activation, trace.activations[k],
                                       upstream);
        delta.swap(upstream);
    }
}

}  // namespace

ForwardTrace forward_trace(const NetworkParams& params, const Eigen::Ref<const Mat>& inputs) {
    ForwardTrace trace;
    forward_trace_into(params, inputs, trace);
    return trace;
}

Mat backward(const NetworkParams& params, const ForwardTrace& trace,
             const Eigen::Ref<const Mat>& output_cotangent, NetworkGrads& grads) {
    Mat delta = output_cotangent;
    scale_by_activation_derivative(params.layers.back().activation, trace.activations.back(),
                                   delta);
    Mat upstream;
    Mat input_gradient;
    backward_impl(params, trace, grads, delta, upstream, &input_gradient);
    return input_gradient;
}

double loss_and_grads(const NetworkParams& params, const Eigen::Ref<const Mat>& inputs,
                      const Eigen::Ref<const Mat>& targets, NetworkGrads& grads,
                      TrainScratch& scratch) {
    if (inputs.cols() == 0) {
        throw InvalidArgumentError("loss_and_grads: empty batch");
    }
    if (targets.rows() != params.output_dim() || targets.cols() != inputs.cols()) {
        throw ShapeError("loss_and_grads: target shape " + std::to_string(targets.rows()) + "x" +
                         std::to_string(targets.cols()) + " does not match output dim " +
                         std::to_string(params.output_dim()) + " and batch " +
                         std::to_string(inputs.cols()));
    }
    const double batch = static_cast<double>(inputs.cols());
    const double out_dim = static_cast<double>(params.output_dim());

    forward_trace_into(params, inputs, scratch.trace);
    scratch.residual = scratch.trace.activations.back() - targets;
    const double loss = scratch.residual.squaredNorm() / (batch * out_dim);

    scratch.delta = (2.0 / (batch * out_dim)) * scratch.residual;
    scale_by_activation_derivative(params.layers.back().activation,
                                   scratch.trace.activations.back(), scratch.delta);
    backward_impl(params, scratch.trace, grads, scratch.delta, scratch.upstream, nullptr);
    return loss;
}

std::pair<double, NetworkGrads> loss_and_grads(const NetworkParams& params,
                                               const Eigen::Ref<const Mat>& inputs,
                                               const Eigen::Ref<const Mat>& targets) {
    NetworkGrads grads;
    TrainScratch scratch;
    double loss = loss_and_grads(params, inputs, targets, grads, scratch);
    return {loss, std::move(grads)};
}

void backward_params(const NetworkParams& params, const ForwardTrace& trace,
                     const Eigen::Ref<const Mat>& output_cotangent, NetworkGrads& grads,
                     TrainScratch& scratch) {
    scratch.delta = output_cotangent;
    scale_by_activation_derivative(params.layers.back().activation, trace.activations.back(),
                                   scratch.delta);
    backward_impl(params, trace, grads, scratch.delta, scratch.upstream, nullptr);
}

Vec input_vjp(const NetworkParams& params, const Eigen::Ref<const Vec>& input,
              const Eigen::Ref<const Vec>& output_cotangent) {
    ForwardTrace trace = forward_trace(params, input);
    NetworkGrads scratch;
    return backward(params, trace, output_cotangent, scratch);
}

Vec input_gradient(const NetworkParams& params, const Eigen::Ref<const Vec>& input,
                   const Eigen::Ref<const Vec>& target) {
    if (target.size() != params.output_dim()) {
        throw ShapeError("input_gradient: target size " + std::to_string(target.size()) +
                         " != output dim " + std::to_string(params.output_dim()));
    }
    ForwardTrace trace = forward_trace(params, input);
    Vec residual = trace.activations.back() - target;
    Vec cotangent = (2.0 / params.output_dim()) * residual;
    NetworkGrads scratch;
    return backward(params, trace, cotangent, scratch);
}

}  // namespace authfp
