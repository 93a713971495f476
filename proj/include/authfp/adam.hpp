#pragma once

#include "authfp/network.hpp"

namespace authfp {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moment accumulators, shaped exactly like the parameters.
struct AdamState {
    NetworkGrads first_moment;
    NetworkGrads second_moment;
    long step = 0;
    AdamConfig config;

    static AdamState init(const NetworkParams& params, AdamConfig config = {});
};

/// Standard Adam update with bias correction; increments state.step.
/// Throws TrainingDivergedError naming the layer if a gradient is non-finite.
void adam_step(NetworkParams& params, const NetworkGrads& grads, AdamState& state);

}  // namespace authfp
