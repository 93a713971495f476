#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "authfp/detector.hpp"
#include "authfp/generators.hpp"

namespace authfp {

struct PgdConfig {
    double epsilon = 0.5;     // L-inf budget around the start image
    double step_size = 0.001;
    double momentum = 0.9;
    int max_steps = 500;
    bool early_stop = true;

    void validate() const;
};

/// Outcome of one forgery attempt. `success` means the final image was
/// re-checked Authentic by the decision oracle the attack targets.
struct AttackReport {
    bool success = false;
    int steps_used = 0;
    int detector_queries = 0;
    double linf = 0.0;
    double l2 = 0.0;
    double ssim_proxy = 1.0;  // windowed structural-similarity stand-in for a perceptual metric
    std::vector<double> objective_trace;  // objective value per step (optional consumers)
};

/// Loss the attacker descends plus its gradient with respect to the pixels.
struct AttackObjective {
    std::function<double(const Image&)> value;
    std::function<Vec(const Image&)> gradient;
};

/// Binary accept/reject oracle; the only signal the attacker gets back.
using VerdictOracle = std::function<bool(const Image&)>;

/// Momentum PGD under an L-inf ball and pixel bounds, querying the binary
/// oracle after every step and stopping early on acceptance.
/// Precondition: the oracle rejects the start image.
AttackReport pgd_forge(const Image& start, const AttackObjective& objective,
                       const VerdictOracle& oracle, const PgdConfig& config);

/// The detector-error loss e(x) = (1/l)||R(x) - x_s||^2 with its exact pixel
/// gradient, including the dependence of the extracted fingerprint on the
/// pixels being perturbed. Passing the true detector is the white-box attack
/// (reads the secret index vector; explicitly white-box use only); passing an
/// attacker-trained detector is the surrogate attack. The detector must
/// outlive the returned objective.
AttackObjective detection_error_objective(const Detector& detector);

/// Attacker-side certification: runs the same training procedure with an
/// attacker-sampled index vector. `negative` is accepted for parity with
/// the attacker's knowledge but the procedure only consumes target samples.
Detector train_surrogate(ImageSource& target, ImageSource* negative, int guessed_length,
                         TrainConfig config, Rng& rng);

/// Feed-forward binary classifier with sigmoid readout, trained with
/// logistic loss to distinguish target from negative outputs.
struct Discriminator {
    NetworkParams net;  // d -> hidden -> 1 logit
    double accept_threshold = 0.5;  // on the sigmoid score

    double score(const Image& image) const;      // P(target) in (0,1)
    bool accepts(const Image& image) const { return score(image) > accept_threshold; }
};

struct DiscriminatorConfig {
    std::vector<int> hidden = {512, 256};
    int batch_size = 64;  // per class
    double learning_rate = 1e-3;
    int train_steps = 2000;
    int calibration_samples = 500;
    double target_tpr = 0.95;
};

Discriminator train_discriminator(ImageSource& target, ImageSource& negative,
                                  const DiscriminatorConfig& config, Rng& rng);

/// Objective that maximizes the discriminator's authenticity score
/// (minimizes -log sigmoid(logit)).
AttackObjective discriminator_objective(const Discriminator& discriminator);

/// Pixel manipulation: indices in M are replaced (zero or a fixed value),
/// all other pixels are bit-identical.
enum class ManipulationMode { Zero, Value };
Image manipulate_pixels(const Image& image, const std::vector<int>& manipulated,
                        ManipulationMode mode, double value = 0.0);

/// Mean L1 shift of the reconstructor output under random m-pixel zeroing,
/// per manipulation size m.
struct StabilityRow {
    int m = 0;
    double mean_l1_shift = 0.0;
};
std::vector<StabilityRow> stability_sweep(const Detector& detector, ImageSource& source,
                                          const std::vector<int>& m_values, int trials, Rng& rng);

/// Minimum fingerprint overlap |M ∩ S| that forces rejection:
/// k = ceil(tau * l / delta^2).
int rejection_threshold(double tau, int l, double delta);

/// Non-adaptive threshold group testing query-complexity estimate with
/// constant 1: ((l+1)/k)^k * ((l+1)/(l-k+1))^(l-k+1) * (l+1) * ln(d/(l+1)).
/// Order-of-magnitude semantics; not a tight bound.
double natgt_query_complexity(int d, int l, int k);

/// log10(l!) via the log-gamma function.
double permutation_complexity(int l);

/// One binary probe: zero the pixels in M and ask the detector.
/// Precondition: the unmodified image verifies Authentic.
Verdict group_test_probe(const Detector& detector, const Image& image,
                         const std::vector<int>& manipulated);

/// Empirical delta^2 = E[(x_i - x'_i)^2] for the given manipulation mode,
/// estimated over random pixels of authentic images.
double measure_delta_sq(ImageSource& source, ManipulationMode mode, double value, int n_samples,
                        Rng& rng);

/// L-inf / L2 / windowed-SSIM distortion between two images.
struct Distortion {
    double linf = 0.0;
    double l2 = 0.0;
    double ssim_proxy = 1.0;
};
Distortion measure_distortion(const Image& original, const Image& modified);

}  // namespace authfp
