#pragma once

#include <span>
#include <string>
#include <vector>

#include "authfp/fingerprint.hpp"
#include "authfp/generators.hpp"
#include "authfp/metrics.hpp"
#include "authfp/network.hpp"

namespace authfp {

struct TrainConfig {
    int fingerprint_length = 32;
    int batch_size = 128;
    double learning_rate = 1e-3;
    int train_steps = 20000;
    uint64_t seed = 0;
    int calibration_samples = 2000;
    double target_tpr = 0.95;
    IndexSampling sampling = IndexSampling::WithReplacement;
    std::vector<int> reconstructor_hidden = {512, 256};

    void validate() const;
};

struct DetectorMeta {
    std::string origin_label;       // label of the generator certified against
    uint64_t config_digest = 0;
    double final_train_loss = 0.0;
};

/// The verifier's secret artifact: reconstructor, index vector, calibrated
/// acceptance threshold.
struct Detector {
    NetworkParams reconstructor;
    IndexVector indices;
    double tau = 0.0;
    IndexSampling sampling = IndexSampling::WithReplacement;
    DetectorMeta meta;

    int dim() const { return indices.dim; }
    int fingerprint_length() const { return indices.length(); }
};

enum class Verdict { Authentic, NotAuthentic };

/// Certification: samples the secret index vector, trains the reconstructor
/// on freshly generated batches with Adam, then calibrates the threshold on
/// held-out authentic images.
Detector certify(ImageSource& source, const TrainConfig& config, Rng& rng);
Detector certify(const GeneratorSpec& generator, const TrainConfig& config, Rng& rng);

/// Target-TPR quantile (higher interpolation) of fresh authentic detection
/// errors, so that P(error < tau | authentic) is approximately target_tpr.
double calibrate_threshold(const Detector& detector, ImageSource& source, int n_cal,
                           double target_tpr, Rng& rng);

/// Mean squared error between the reconstructed and extracted fingerprint.
double detection_error(const Detector& detector, const Image& image);

/// Detection errors for a batch of images stored as columns.
std::vector<double> detection_errors(const Detector& detector, const Eigen::Ref<const Mat>& images);

/// Authentic iff detection_error < tau, strict.
Verdict verify(const Detector& detector, const Image& image);

/// Worst-case member error.
double ensemble_error_max(std::span<const Detector> detectors, const Image& image);

/// Authentic iff at least one member verifies Authentic.
Verdict ensemble_verify_any_accept(std::span<const Detector> detectors, const Image& image);

/// Collects n_eval detection errors per side and builds the report.
/// The positive side uses the detector's own tau for the tpr/fpr fields.
EvalReport evaluate(const Detector& detector, ImageSource& positive, ImageSource& negative,
                    int n_eval, double target_tpr, Rng& rng);

/// Ensemble (max-MSE) variant of evaluate.
EvalReport evaluate_ensemble(std::span<const Detector> detectors, ImageSource& positive,
                             ImageSource& negative, int n_eval, double target_tpr, Rng& rng);

}  // namespace authfp
