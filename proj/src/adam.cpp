#include "authfp/adam.hpp"

#include <cmath>
#include <string>

#include "authfp/errors.hpp"

namespace authfp {

AdamState AdamState::init(const NetworkParams& params, AdamConfig config) {
    AdamState state;
    state.config = config;
    for (const Layer& layer : params.layers) {
        state.first_moment.layers.push_back(
            {Mat::Zero(layer.out_dim(), layer.in_dim()), Vec::Zero(layer.out_dim())});
        state.second_moment.layers.push_back(
            {Mat::Zero(layer.out_dim(), layer.in_dim()), Vec::Zero(layer.out_dim())});
    }
    return state;
}

namespace {

void update_tensor(Eigen::Ref<Mat> param, const Eigen::Ref<const Mat>& grad, Eigen::Ref<Mat> m,
                   Eigen::Ref<Mat> v, const AdamConfig& cfg, double bias1, double bias2) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.array().square().matrix();
    param.array() -=
        cfg.learning_rate * (m.array() / bias1) / ((v.array() / bias2).sqrt() + cfg.epsilon);
}

}  // namespace

void adam_step(NetworkParams& params, const NetworkGrads& grads, AdamState& state) {
    if (grads.layers.size() != params.layers.size()) {
        throw ShapeError("adam_step: gradient layer count " + std::to_string(grads.layers.size()) +
                         " != parameter layer count " + std::to_string(params.layers.size()));
    }
    for (size_t k = 0; k < params.layers.size(); ++k) {
        const LayerGrads& g = grads.layers[k];
        if (!g.weights.allFinite() || !g.bias.allFinite()) {
            throw TrainingDivergedError("adam_step: non-finite gradient in layer " +
                                        std::to_string(k));
        }
        if (g.weights.rows() != params.layers[k].weights.rows() ||
            g.weights.cols() != params.layers[k].weights.cols()) {
            throw ShapeError("adam_step: gradient shape mismatch in layer " + std::to_string(k));
        }
    }

    ++state.step;
    const double bias1 = 1.0 - std::pow(state.config.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(state.config.beta2, static_cast<double>(state.step));
    for (size_t k = 0; k < params.layers.size(); ++k) {
        update_tensor(params.layers[k].weights, grads.layers[k].weights,
                      state.first_moment.layers[k].weights, state.second_moment.layers[k].weights,
                      state.config, bias1, bias2);
        // Bias vectors ride the same update as one-column matrices.
        update_tensor(params.layers[k].bias, grads.layers[k].bias,
                      state.first_moment.layers[k].bias, state.second_moment.layers[k].bias,
                      state.config, bias1, bias2);
    }
}

}  // namespace authfp
