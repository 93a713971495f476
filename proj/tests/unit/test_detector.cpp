#include <doctest.h>

#include <cmath>

#include "authfp/detector.hpp"
#include "authfp/errors.hpp"

using namespace authfp;

namespace {

// Emits the same image every time: every pixel 0.5.
class ConstantSource : public ImageSource {
public:
    explicit ConstantSource(ImageShape shape) : shape_(shape) {}
    ImageShape shape() const override { return shape_; }
    Image sample(Rng&) override {
        Image img;
        img.shape = shape_;
        img.pixels = Vec::Constant(shape_.dim(), 0.5);
        return img;
    }

private:
    ImageShape shape_;
};

TrainConfig tiny_train_config() {
    TrainConfig config;
    config.fingerprint_length = 8;
    config.batch_size = 32;
    config.train_steps = 300;
    config.calibration_samples = 200;
    config.reconstructor_hidden = {64, 32};
    return config;
}

GeneratorSpec tiny_generator(uint64_t seed = 5) {
    GeneratorSpec spec;
    spec.seed = seed;
    spec.latent_dim = 16;
    spec.shape = {1, 16, 16};
    spec.hidden_width = 64;
    return spec;
}

// Detector with a constant-output reconstructor; detection error against a
// constant image p is mean over j of (c_j - p)^2.
Detector constant_detector(int d, int l, Vec output, double tau) {
    Detector det;
    Layer layer;
    layer.weights = Mat::Zero(l, d);
    layer.bias = std::move(output);
    layer.activation = Activation::Identity;
    det.reconstructor.layers.push_back(layer);
    det.indices.dim = d;
    for (int j = 0; j < l; ++j) det.indices.indices.push_back(static_cast<uint32_t>(j));
    det.tau = tau;
    return det;
}

Image constant_image(int d, double value) {
    Image img;
    img.shape = {1, 1, d};
    img.pixels = Vec::Constant(d, value);
    return img;
}

}  // namespace

TEST_CASE("constant-target regression: l=1 on a constant source") {
    ConstantSource source({1, 4, 4});
    TrainConfig config = tiny_train_config();
    config.fingerprint_length = 1;
    config.reconstructor_hidden = {16};
    Rng rng(3);
    Detector det = certify(source, config, rng);
    CHECK(det.meta.final_train_loss < 1e-4);

    Rng probe(4);
    Image img = source.sample(probe);
    Vec predicted = forward(det.reconstructor, img.pixels);
    CHECK(predicted[0] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("certification is deterministic: same config and seed twice") {
    GeneratorSpec spec = tiny_generator();
    TrainConfig config = tiny_train_config();
    Rng rng_a(12), rng_b(12);
    Detector a = certify(spec, config, rng_a);
    Detector b = certify(spec, config, rng_b);
    CHECK(a.indices.indices == b.indices.indices);
    CHECK(a.tau == b.tau);
    REQUIRE(a.reconstructor.layers.size() == b.reconstructor.layers.size());
    for (size_t k = 0; k < a.reconstructor.layers.size(); ++k) {
        CHECK(a.reconstructor.layers[k].weights == b.reconstructor.layers[k].weights);
        CHECK(a.reconstructor.layers[k].bias == b.reconstructor.layers[k].bias);
    }
}

TEST_CASE("training beats an untrained reconstructor by a wide margin") {
    GeneratorSpec spec = tiny_generator(17);
    TrainConfig config = tiny_train_config();
    config.train_steps = 800;
    Rng rng(5);
    Detector trained = certify(spec, config, rng);

    // Untrained control: freshly initialized net with the same indices.
    Rng init_rng(1234);
    Detector untrained = trained;
    untrained.reconstructor = make_mlp(spec.dim(), config.reconstructor_hidden,
                                       config.fingerprint_length, init_rng);

    SyntheticGenerator source(spec);
    Rng eval_rng(77);
    Mat held_out = source.sample_batch(400, eval_rng);
    double mean_trained = 0.0, mean_untrained = 0.0;
    for (double e : detection_errors(trained, held_out)) mean_trained += e;
    for (double e : detection_errors(untrained, held_out)) mean_untrained += e;
    CHECK(mean_untrained > 10.0 * mean_trained);
}

TEST_CASE("recalibration with the same seed reproduces tau") {
    GeneratorSpec spec = tiny_generator();
    TrainConfig config = tiny_train_config();
    Rng rng(8);
    Detector det = certify(spec, config, rng);
    SyntheticGenerator source(spec);
    Rng cal_a(99), cal_b(99);
    const double tau_a = calibrate_threshold(det, source, 200, 0.95, cal_a);
    const double tau_b = calibrate_threshold(det, source, 200, 0.95, cal_b);
    CHECK(tau_a == tau_b);
}

TEST_CASE("detection error: forced equality gives zero") {
    Detector det = constant_detector(4, 2, Vec::Constant(2, 0.5), 0.1);
    Image img = constant_image(4, 0.5);
    CHECK(detection_error(det, img) == 0.0);
}

TEST_CASE("detection error: hand computation") {
    // r' = [0.5, 0.5], f' = [0.0, 1.0] -> e = (0.25 + 0.25) / 2 = 0.25.
    Detector det = constant_detector(2, 2, Vec::Constant(2, 0.5), 0.1);
    Image img;
    img.shape = {1, 1, 2};
    img.pixels = Vec::Zero(2);
    img.pixels << 0.0, 1.0;
    CHECK(detection_error(det, img) == doctest::Approx(0.25));
}

TEST_CASE("detection error equals manual forward + extraction composition") {
    GeneratorSpec spec = tiny_generator(23);
    TrainConfig config = tiny_train_config();
    config.train_steps = 50;
    Rng rng(6);
    Detector det = certify(spec, config, rng);

    SyntheticGenerator source(spec);
    Rng sample_rng(31);
    Image img = source.sample(sample_rng);
    Vec r = forward(det.reconstructor, img.pixels);
    Vec f = extract_fingerprint(img, det.indices).values;
    const double manual = (r - f).squaredNorm() / det.fingerprint_length();
    CHECK(detection_error(det, img) == doctest::Approx(manual).epsilon(1e-15));
}

TEST_CASE("detection error rejects wrong image dimension") {
    Detector det = constant_detector(4, 2, Vec::Constant(2, 0.5), 0.1);
    Image img = constant_image(5, 0.5);
    CHECK_THROWS_AS((void)detection_error(det, img), InvalidArgumentError);
}

TEST_CASE("verify uses strict inequality at tau") {
    // e = 0.25 exactly (hand computation above).
    Detector det = constant_detector(2, 2, Vec::Constant(2, 0.5), 0.25);
    Image img;
    img.shape = {1, 1, 2};
    img.pixels = Vec::Zero(2);
    img.pixels << 0.0, 1.0;
    CHECK(verify(det, img) == Verdict::NotAuthentic);  // ties reject

    det.tau = 0.250000001;
    CHECK(verify(det, img) == Verdict::Authentic);

    Detector zero_err = constant_detector(2, 2, Vec::Constant(2, 0.0), 0.1);
    Image zeros = constant_image(2, 0.0);
    CHECK(detection_error(zero_err, zeros) == 0.0);
    CHECK(verify(zero_err, zeros) == Verdict::Authentic);
}

TEST_CASE("raising tau never flips Authentic to NotAuthentic") {
    Detector det = constant_detector(2, 2, Vec::Constant(2, 0.5), 0.1);
    Image img = constant_image(2, 0.4);
    const Verdict at_low = verify(det, img);
    det.tau = 10.0;
    if (at_low == Verdict::Authentic) CHECK(verify(det, img) == Verdict::Authentic);
}

TEST_CASE("ensemble max error and any-accept semantics") {
    // Three constant detectors with errors 0.1, 0.3, 0.2 on an all-zero image.
    const int d = 4;
    std::vector<Detector> members;
    for (double e : {0.1, 0.3, 0.2}) {
        members.push_back(constant_detector(d, 1, Vec::Constant(1, std::sqrt(e)), 0.0));
    }
    Image zeros = constant_image(d, 0.0);
    for (size_t i = 0; i < members.size(); ++i) {
        CHECK(detection_error(members[i], zeros) ==
              doctest::Approx(std::vector<double>{0.1, 0.3, 0.2}[i]));
    }
    CHECK(ensemble_error_max(members, zeros) == doctest::Approx(0.3));

    // N=1 ensemble equals the single-member error.
    CHECK(ensemble_error_max(std::span<const Detector>(members.data(), 1), zeros) ==
          doctest::Approx(0.1));

    // Adding a member never decreases the max.
    for (size_t n = 1; n <= members.size(); ++n) {
        const double here = ensemble_error_max(std::span<const Detector>(members.data(), n), zeros);
        const double prev =
            ensemble_error_max(std::span<const Detector>(members.data(), std::max<size_t>(1, n - 1)),
                               zeros);
        CHECK(here >= prev);
    }

    // All members reject.
    CHECK(ensemble_verify_any_accept(members, zeros) == Verdict::NotAuthentic);

    // One acceptance among four is enough.
    members.push_back(constant_detector(d, 1, Vec::Constant(1, 0.0), 0.5));
    CHECK(verify(members.back(), zeros) == Verdict::Authentic);
    CHECK(ensemble_verify_any_accept(members, zeros) == Verdict::Authentic);

    CHECK_THROWS_AS((void)ensemble_error_max(std::span<const Detector>(), zeros),
                    InvalidArgumentError);
    CHECK_THROWS_AS((void)ensemble_verify_any_accept(std::span<const Detector>(), zeros),
                    InvalidArgumentError);
}

TEST_CASE("acceptance rate on fresh authentic images tracks the target TPR") {
    GeneratorSpec spec = tiny_generator(29);
    TrainConfig config = tiny_train_config();
    config.train_steps = 600;
    config.calibration_samples = 1000;
    Rng rng(41);
    Detector det = certify(spec, config, rng);

    SyntheticGenerator source(spec);
    Rng fresh(4242);
    Mat images = source.sample_batch(2000, fresh);
    int accepted = 0;
    for (double e : detection_errors(det, images)) accepted += (e < det.tau) ? 1 : 0;
    const double rate = accepted / 2000.0;
    CHECK(rate > 0.93);
    CHECK(rate < 0.97);
}

TEST_CASE("evaluate on identical generators sits near the target TPR") {
    GeneratorSpec spec = tiny_generator(31);
    TrainConfig config = tiny_train_config();
    Rng rng(51);
    Detector det = certify(spec, config, rng);

    SyntheticGenerator pos(spec), neg(spec);
    Rng eval_rng(61);
    EvalReport report = evaluate(det, pos, neg, 1000, 0.95, eval_rng);
    CHECK(report.fpr_at_target > 0.90);
    CHECK(report.fpr_at_target <= 1.0);
    CHECK(report.auc == doctest::Approx(0.5).epsilon(0.08));
}

TEST_CASE("evaluate separates a strongly perturbed negative") {
    GeneratorSpec spec = tiny_generator(37);
    TrainConfig config = tiny_train_config();
    config.train_steps = 800;
    Rng rng(71);
    Detector det = certify(spec, config, rng);

    SyntheticGenerator pos(spec);
    SyntheticGenerator neg(apply_variant(spec, VariantOp::perturb(0.5)));
    Rng eval_rng(81);
    EvalReport report = evaluate(det, pos, neg, 500, 0.95, eval_rng);
    CHECK(report.fpr_at_target < 0.5);
    CHECK(report.auc > 0.8);
}
