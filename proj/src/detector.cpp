#include "authfp/detector.hpp"

#include <cmath>
#include <string>

#include "authfp/adam.hpp"
#include "authfp/errors.hpp"

namespace authfp {

void TrainConfig::validate() const {
    if (fingerprint_length < 1) throw InvalidArgumentError("train: fingerprint_length must be >= 1");
    if (batch_size < 1) throw InvalidArgumentError("train: batch_size must be >= 1");
    if (!(learning_rate > 0)) throw InvalidArgumentError("train: learning_rate must be > 0");
    if (train_steps < 1) throw InvalidArgumentError("train: train_steps must be >= 1");
    if (calibration_samples < 100) {
        throw InvalidArgumentError("train: calibration_samples must be >= 100");
    }
    if (!(target_tpr > 0.0 && target_tpr < 1.0)) {
        throw InvalidArgumentError("train: target_tpr must be in (0,1)");
    }
    for (int w : reconstructor_hidden) {
        if (w < 1) throw InvalidArgumentError("train: hidden widths must be >= 1");
    }
}

Detector certify(ImageSource& source, const TrainConfig& config, Rng& rng) {
    config.validate();
    const int d = source.shape().dim();
    const int l = config.fingerprint_length;

    Detector detector;
    detector.sampling = config.sampling;
    detector.indices = sample_index_vector(d, l, rng, config.sampling);
    detector.reconstructor = make_mlp(d, config.reconstructor_hidden, l, rng);

    AdamConfig adam_config;
    adam_config.learning_rate = config.learning_rate;
    AdamState adam = AdamState::init(detector.reconstructor, adam_config);

    double loss = 0.0;
    NetworkGrads grads;
    TrainScratch scratch;
    Mat batch(d, config.batch_size);
    Mat targets(l, config.batch_size);
    for (int step = 0; step < config.train_steps; ++step) {
        source.sample_batch_into(batch, rng);
        targets = extract_fingerprint_batch(batch, detector.indices);
        loss = loss_and_grads(detector.reconstructor, batch, targets, grads, scratch);
        if (!std::isfinite(loss)) {
            throw TrainingDivergedError("certify: non-finite loss at step " + std::to_string(step));
        }
        adam_step(detector.reconstructor, grads, adam);
    }
    detector.meta.final_train_loss = loss;

    detector.tau = calibrate_threshold(detector, source, config.calibration_samples,
                                       config.target_tpr, rng);
    return detector;
}

Detector certify(const GeneratorSpec& generator, const TrainConfig& config, Rng& rng) {
    SyntheticGenerator source(generator);
    Detector detector = certify(source, config, rng);
    detector.meta.origin_label = generator.label();
    return detector;
}

double calibrate_threshold(const Detector& detector, ImageSource& source, int n_cal,
                           double target_tpr, Rng& rng) {
    if (n_cal < 100) throw InvalidArgumentError("calibrate: n_cal must be >= 100");
    Mat images = source.sample_batch(n_cal, rng);
    return quantile_higher(detection_errors(detector, images), target_tpr);
}

double detection_error(const Detector& detector, const Image& image) {
    if (image.shape.dim() != detector.dim() || image.pixels.size() != detector.dim()) {
        throw InvalidArgumentError("detection_error: image has d=" +
                                   std::to_string(image.shape.dim()) + ", detector expects d=" +
                                   std::to_string(detector.dim()));
    }
    Vec reconstructed = forward(detector.reconstructor, image.pixels);
    Vec extracted = extract_fingerprint(image, detector.indices).values;
    return (reconstructed - extracted).squaredNorm() / detector.fingerprint_length();
}

std::vector<double> detection_errors(const Detector& detector,
                                     const Eigen::Ref<const Mat>& images) {
    if (images.rows() != detector.dim()) {
        throw InvalidArgumentError("detection_errors: images have d=" +
                                   std::to_string(images.rows()) + ", detector expects d=" +
                                   std::to_string(detector.dim()));
    }
    Mat reconstructed = forward_batch(detector.reconstructor, images);
    Mat extracted = extract_fingerprint_batch(images, detector.indices);
    Eigen::RowVectorXd errors = (reconstructed - extracted).colwise().squaredNorm() /
                                static_cast<double>(detector.fingerprint_length());
    return {errors.data(), errors.data() + errors.size()};
}

Verdict verify(const Detector& detector, const Image& image) {
    return detection_error(detector, image) < detector.tau ? Verdict::Authentic
                                                           : Verdict::NotAuthentic;
}

double ensemble_error_max(std::span<const Detector> detectors, const Image& image) {
    if (detectors.empty()) throw InvalidArgumentError("ensemble: empty detector list");
    double worst = 0.0;
    for (const Detector& d : detectors) worst = std::max(worst, detection_error(d, image));
    return worst;
}

Verdict ensemble_verify_any_accept(std::span<const Detector> detectors, const Image& image) {
    if (detectors.empty()) throw InvalidArgumentError("ensemble: empty detector list");
    for (const Detector& d : detectors) {
        if (verify(d, image) == Verdict::Authentic) return Verdict::Authentic;
    }
    return Verdict::NotAuthentic;
}

namespace {

std::vector<double> side_errors(std::span<const Detector> detectors, ImageSource& source,
                                int n_eval, Rng& rng) {
    // Batched in slabs to bound memory at large n_eval.
    std::vector<double> errors;
    errors.reserve(static_cast<size_t>(n_eval));
    int remaining = n_eval;
    while (remaining > 0) {
        const int slab = std::min(remaining, 512);
        Mat images = source.sample_batch(slab, rng);
        std::vector<double> worst(static_cast<size_t>(slab), 0.0);
        for (const Detector& d : detectors) {
            std::vector<double> e = detection_errors(d, images);
            for (int i = 0; i < slab; ++i) {
                worst[static_cast<size_t>(i)] = std::max(worst[static_cast<size_t>(i)],
                                                         e[static_cast<size_t>(i)]);
            }
        }
        errors.insert(errors.end(), worst.begin(), worst.end());
        remaining -= slab;
    }
    return errors;
}

}  // namespace

EvalReport evaluate_ensemble(std::span<const Detector> detectors, ImageSource& positive,
                             ImageSource& negative, int n_eval, double target_tpr, Rng& rng) {
    if (detectors.empty()) throw InvalidArgumentError("evaluate: empty detector list");
    if (n_eval < 100) throw InvalidArgumentError("evaluate: n_eval must be >= 100 per side");
    std::vector<double> pos = side_errors(detectors, positive, n_eval, rng);
    std::vector<double> neg = side_errors(detectors, negative, n_eval, rng);
    const double decision_tau = detectors.size() == 1 ? detectors[0].tau : -1.0;
    return make_eval_report(std::move(pos), std::move(neg), target_tpr, decision_tau);
}

EvalReport evaluate(const Detector& detector, ImageSource& positive, ImageSource& negative,
                    int n_eval, double target_tpr, Rng& rng) {
    return evaluate_ensemble(std::span<const Detector>(&detector, 1), positive, negative, n_eval,
                             target_tpr, rng);
}

}  // namespace authfp
