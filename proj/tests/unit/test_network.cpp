#include <doctest.h>

#include <cmath>

#include "authfp/errors.hpp"
#include "authfp/network.hpp"
#include "oracles.hpp"

using namespace authfp;

namespace {

NetworkParams identity_net(int dim) {
    NetworkParams params;
    Layer layer;
    layer.weights = Mat::Identity(dim, dim);
    layer.bias = Vec::Zero(dim);
    layer.activation = Activation::Identity;
    params.layers.push_back(layer);
    return params;
}

// Random net with a LeakyReLU and a tanh hidden layer, widths <= 64.
NetworkParams random_net(Rng& rng, int in = 5, int mid = 7, int out = 3) {
    NetworkParams params = make_mlp(in, {mid, 6}, out, rng);
    params.layers[1].activation = Activation::Tanh;
    return params;
}

}  // namespace

TEST_CASE("identity network passes input through") {
    NetworkParams net = identity_net(2);
    Vec x(2);
    x << 0.3, 0.7;
    Vec y = forward(net, x);
    CHECK(y[0] == doctest::Approx(0.3));
    CHECK(y[1] == doctest::Approx(0.7));
}

TEST_CASE("hand-computable affine layer") {
    NetworkParams params;
    Layer layer;
    layer.weights = Mat::Zero(2, 2);
    layer.weights(0, 0) = 2.0;
    layer.weights(1, 1) = 2.0;
    layer.bias = Vec::Ones(2);
    layer.activation = Activation::Identity;
    params.layers.push_back(layer);

    Vec x = Vec::Ones(2);
    Vec y = forward(params, x);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[1] == doctest::Approx(3.0));
}

TEST_CASE("forward matches an independently written straight-line evaluator") {
    Rng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        NetworkParams net = random_net(rng);
        // Give the biases some life; make_mlp zeroes them.
        for (Layer& layer : net.layers) {
            layer.bias = Vec::NullaryExpr(layer.out_dim(), [&]() { return rng.next_gaussian(); });
        }
        Vec x = Vec::NullaryExpr(net.input_dim(), [&]() { return rng.next_gaussian(); });
        Vec got = forward(net, x);
        std::vector<double> want =
            oracle::straight_line_forward(net, {x.data(), x.data() + x.size()});
        REQUIRE(got.size() == static_cast<Eigen::Index>(want.size()));
        for (int j = 0; j < got.size(); ++j) {
            CHECK(got[j] == doctest::Approx(want[static_cast<size_t>(j)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward rejects dimension mismatches with expected/actual dims") {
    NetworkParams net = identity_net(2);
    Vec x = Vec::Zero(3);
    CHECK_THROWS_AS((void)forward(net, x), ShapeError);
    CHECK_THROWS_WITH_AS((void)forward(net, x), doctest::Contains("expected 2"), ShapeError);
}

TEST_CASE("zero residual gives zero loss and zero grads") {
    Rng rng(7);
    NetworkParams net = random_net(rng);
    Mat inputs = Mat::NullaryExpr(net.input_dim(), 4, [&]() { return rng.next_gaussian(); });
    Mat targets = forward_batch(net, inputs);
    auto [loss, grads] = loss_and_grads(net, inputs, targets);
    CHECK(loss == 0.0);
    for (const LayerGrads& g : grads.layers) {
        CHECK(g.weights.cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.bias.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("scalar chain rule by hand: identity net, output 1 target 0") {
    NetworkParams net = identity_net(1);
    Mat input = Mat::Constant(1, 1, 1.0);
    Mat target = Mat::Constant(1, 1, 0.0);
    auto [loss, grads] = loss_and_grads(net, input, target);
    CHECK(loss == doctest::Approx(1.0));
    CHECK(grads.layers[0].bias[0] == doctest::Approx(2.0));
    CHECK(grads.layers[0].weights(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("loss gradients match central finite differences") {
    Rng rng(202);
    NetworkParams net = random_net(rng);
    const int batch = 3;
    Mat inputs = Mat::NullaryExpr(net.input_dim(), batch, [&]() { return rng.next_gaussian(); });
    Mat targets = Mat::NullaryExpr(net.output_dim(), batch, [&]() { return rng.next_unit(); });

    auto [loss, grads] = loss_and_grads(net, inputs, targets);
    CHECK(loss > 0.0);
    CHECK(loss == doctest::Approx(oracle::straight_line_loss(net, inputs, targets)).epsilon(1e-10));

    for (size_t k = 0; k < net.layers.size(); ++k) {
        Mat& w = net.layers[k].weights;
        for (int r = 0; r < w.rows(); ++r) {
            for (int c = 0; c < w.cols(); ++c) {
                const double fd = oracle::central_difference(
                    [&](double v) { w(r, c) = v; },
                    [&]() { return oracle::straight_line_loss(net, inputs, targets); }, w(r, c));
                CHECK_MESSAGE(oracle::close_rel(grads.layers[k].weights(r, c), fd),
                              "layer ", k, " W(", r, ",", c, ")");
            }
        }
        Vec& b = net.layers[k].bias;
        for (int r = 0; r < b.size(); ++r) {
            const double fd = oracle::central_difference(
                [&](double v) { b[r] = v; },
                [&]() { return oracle::straight_line_loss(net, inputs, targets); }, b[r]);
            CHECK_MESSAGE(oracle::close_rel(grads.layers[k].bias[r], fd), "layer ", k, " b(", r, ")");
        }
    }
}

TEST_CASE("loss_and_grads rejects empty batches and bad shapes") {
    Rng rng(1);
    NetworkParams net = random_net(rng);
    Mat empty(net.input_dim(), 0);
    Mat empty_targets(net.output_dim(), 0);
    CHECK_THROWS_AS((void)loss_and_grads(net, empty, empty_targets), InvalidArgumentError);
    Mat inputs = Mat::Zero(net.input_dim(), 2);
    Mat bad_targets = Mat::Zero(net.output_dim() + 1, 2);
    CHECK_THROWS_AS((void)loss_and_grads(net, inputs, bad_targets), ShapeError);
}

TEST_CASE("input gradient: identity net, input 1, target 0 -> 2") {
    NetworkParams net = identity_net(1);
    Vec x = Vec::Constant(1, 1.0);
    Vec t = Vec::Zero(1);
    Vec g = input_gradient(net, x, t);
    CHECK(g[0] == doctest::Approx(2.0));
}

TEST_CASE("input gradient is zero when output equals target") {
    Rng rng(3);
    NetworkParams net = random_net(rng);
    Vec x = Vec::NullaryExpr(net.input_dim(), [&]() { return rng.next_gaussian(); });
    Vec t = forward(net, x);
    Vec g = input_gradient(net, x, t);
    CHECK(g.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("input gradient matches central finite differences") {
    Rng rng(404);
    NetworkParams net = random_net(rng);
    Vec x = Vec::NullaryExpr(net.input_dim(), [&]() { return rng.next_gaussian(); });
    Vec t = Vec::NullaryExpr(net.output_dim(), [&]() { return rng.next_unit(); });
    Vec grad = input_gradient(net, x, t);

    Mat input_mat = x;
    Mat target_mat = t;
    for (int i = 0; i < x.size(); ++i) {
        const double fd = oracle::central_difference(
            [&](double v) { input_mat(i, 0) = v; },
            [&]() { return oracle::straight_line_loss(net, input_mat, target_mat); }, x[i]);
        CHECK_MESSAGE(oracle::close_rel(grad[i], fd), "input coord ", i);
    }
}
