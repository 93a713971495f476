#include <doctest.h>

#include <cmath>

#include "authfp/adam.hpp"
#include "authfp/errors.hpp"

using namespace authfp;

namespace {

NetworkParams scalar_net(double w, double b) {
    NetworkParams params;
    Layer layer;
    layer.weights = Mat::Constant(1, 1, w);
    layer.bias = Vec::Constant(1, b);
    layer.activation = Activation::Identity;
    params.layers.push_back(layer);
    return params;
}

NetworkGrads scalar_grads(double gw, double gb) {
    NetworkGrads grads;
    grads.layers.push_back({Mat::Constant(1, 1, gw), Vec::Constant(1, gb)});
    return grads;
}

}  // namespace

TEST_CASE("zero gradients leave parameters and moments unchanged") {
    NetworkParams params = scalar_net(0.5, -0.25);
    AdamState state = AdamState::init(params);
    adam_step(params, scalar_grads(0.0, 0.0), state);
    CHECK(params.layers[0].weights(0, 0) == 0.5);
    CHECK(params.layers[0].bias[0] == -0.25);
    CHECK(state.first_moment.layers[0].weights(0, 0) == 0.0);
    CHECK(state.second_moment.layers[0].weights(0, 0) == 0.0);
    CHECK(state.step == 1);
}

TEST_CASE("first step with unit gradient moves by about -lr") {
    // Hand evaluation at t=1: m-hat = g, v-hat = g^2, so the update is
    // -lr * g / (|g| + eps) = -lr * sign(g) up to eps.
    AdamConfig config;
    config.learning_rate = 0.1;
    NetworkParams params = scalar_net(1.0, 0.0);
    AdamState state = AdamState::init(params, config);
    adam_step(params, scalar_grads(1.0, 0.0), state);
    CHECK(params.layers[0].weights(0, 0) == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(state.step == 1);
}

TEST_CASE("two runs from the same state are bit-identical after 100 steps") {
    Rng rng_a(99), rng_b(99);
    NetworkParams a = make_mlp(4, {8}, 2, rng_a);
    NetworkParams b = make_mlp(4, {8}, 2, rng_b);
    AdamState state_a = AdamState::init(a);
    AdamState state_b = AdamState::init(b);

    Rng data_a(17), data_b(17);
    for (int step = 0; step < 100; ++step) {
        Mat x_a = Mat::NullaryExpr(4, 3, [&]() { return data_a.next_gaussian(); });
        Mat x_b = Mat::NullaryExpr(4, 3, [&]() { return data_b.next_gaussian(); });
        Mat t_a = Mat::NullaryExpr(2, 3, [&]() { return data_a.next_unit(); });
        Mat t_b = Mat::NullaryExpr(2, 3, [&]() { return data_b.next_unit(); });
        adam_step(a, loss_and_grads(a, x_a, t_a).second, state_a);
        adam_step(b, loss_and_grads(b, x_b, t_b).second, state_b);
    }
    for (size_t k = 0; k < a.layers.size(); ++k) {
        CHECK(a.layers[k].weights == b.layers[k].weights);
        CHECK(a.layers[k].bias == b.layers[k].bias);
    }
}

TEST_CASE("non-finite gradients raise a divergence error naming the layer") {
    NetworkParams params = scalar_net(1.0, 0.0);
    AdamState state = AdamState::init(params);
    NetworkGrads grads = scalar_grads(std::nan(""), 0.0);
    CHECK_THROWS_WITH_AS(adam_step(params, grads, state), doctest::Contains("layer 0"),
                         TrainingDivergedError);
}

TEST_CASE("adam actually descends a simple quadratic") {
    // Minimize ||w x - 1||^2 over 200 steps on a fixed input.
    NetworkParams params = scalar_net(0.0, 0.0);
    AdamState state = AdamState::init(params, {.learning_rate = 0.05});
    Mat x = Mat::Constant(1, 1, 1.0);
    Mat t = Mat::Constant(1, 1, 1.0);
    double first_loss = loss_and_grads(params, x, t).first;
    for (int i = 0; i < 200; ++i) {
        adam_step(params, loss_and_grads(params, x, t).second, state);
    }
    double final_loss = loss_and_grads(params, x, t).first;
    CHECK(final_loss < first_loss / 100.0);
    CHECK(state.step == 200);
}
