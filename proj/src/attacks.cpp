#include "authfp/attacks.hpp"

#include <cmath>
#include <string>

#include "authfp/adam.hpp"
#include "authfp/errors.hpp"

namespace authfp {

void PgdConfig::validate() const {
    if (epsilon < 0.0) throw InvalidArgumentError("pgd: epsilon must be >= 0");
    if (!(step_size > 0.0)) throw InvalidArgumentError("pgd: step_size must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw InvalidArgumentError("pgd: momentum must be in [0,1)");
    if (max_steps < 1) throw InvalidArgumentError("pgd: max_steps must be >= 1");
}

AttackReport pgd_forge(const Image& start, const AttackObjective& objective,
                       const VerdictOracle& oracle, const PgdConfig& config) {
    config.validate();
    if (!objective.gradient) {
        throw InvalidArgumentError("pgd_forge: objective is not gradient-capable");
    }
    AttackReport report;
    if (oracle(start)) {
        throw InvalidArgumentError("pgd_forge: start image already accepted, nothing to forge");
    }
    ++report.detector_queries;

    if (config.epsilon == 0.0) {
        return report;  // empty budget: no iterate can move
    }

    // Feasible box: L-inf ball around the start intersected with [0,1]^d.
    const Vec lower = (start.pixels.array() - config.epsilon).cwiseMax(0.0).matrix();
    const Vec upper = (start.pixels.array() + config.epsilon).cwiseMin(1.0).matrix();

    Image current = start;
    bool accepted = false;
    Vec accumulated = Vec::Zero(start.pixels.size());
    for (int step = 1; step <= config.max_steps; ++step) {
        Vec grad = objective.gradient(current);
        accumulated = config.momentum * accumulated + grad;
        current.pixels -= config.step_size * accumulated.array().sign().matrix();
        current.pixels = current.pixels.cwiseMax(lower).cwiseMin(upper);
        report.steps_used = step;
        if (objective.value) report.objective_trace.push_back(objective.value(current));
        ++report.detector_queries;
        accepted = oracle(current);
        if (accepted && config.early_stop) break;
    }
    report.success = accepted;

    Distortion dist = measure_distortion(start, current);
    report.linf = dist.linf;
    report.l2 = dist.l2;
    report.ssim_proxy = dist.ssim_proxy;
    return report;
}

AttackObjective detection_error_objective(const Detector& detector) {
    const Detector* det = &detector;
    AttackObjective objective;
    objective.value = [det](const Image& image) { return detection_error(*det, image); };
    objective.gradient = [det](const Image& image) {
        // e(x) = (1/l) || R(x) - x_s ||^2. Both terms depend on x:
        // de/dx = (2/l) (J_R^T r  -  scatter_s(r)),  r = R(x) - x_s.
        const int l = det->fingerprint_length();
        Vec reconstructed = forward(det->reconstructor, image.pixels);
        Vec extracted = extract_fingerprint(image, det->indices).values;
        Vec residual = reconstructed - extracted;
        Vec cotangent = (2.0 / l) * residual;
        Vec grad = input_vjp(det->reconstructor, image.pixels, cotangent);
        for (int j = 0; j < l; ++j) {
            grad[det->indices.indices[static_cast<size_t>(j)]] -= cotangent[j];
        }
        return grad;
    };
    return objective;
}

Detector train_surrogate(ImageSource& target, ImageSource* /*negative: unused by training*/,
                         int guessed_length, TrainConfig config, Rng& rng) {
    config.fingerprint_length = guessed_length;
    return certify(target, config, rng);
}

double Discriminator::score(const Image& image) const {
    double logit = forward(net, image.pixels)[0];
    return 1.0 / (1.0 + std::exp(-logit));
}

Discriminator train_discriminator(ImageSource& target, ImageSource& negative,
                                  const DiscriminatorConfig& config, Rng& rng) {
    if (target.shape().dim() != negative.shape().dim()) {
        throw InvalidArgumentError("discriminator: generators disagree on image dimension");
    }
    const int d = target.shape().dim();
    Discriminator disc;
    disc.net = make_mlp(d, config.hidden, 1, rng);
    AdamConfig adam_config;
    adam_config.learning_rate = config.learning_rate;
    AdamState adam = AdamState::init(disc.net, adam_config);

    const int b = config.batch_size;
    Mat batch(d, 2 * b);
    Mat cotangent(1, 2 * b);
    ForwardTrace trace;
    NetworkGrads grads;
    TrainScratch scratch;
    for (int step = 0; step < config.train_steps; ++step) {
        target.sample_batch_into(batch.leftCols(b), rng);
        negative.sample_batch_into(batch.rightCols(b), rng);

        forward_trace_into(disc.net, batch, trace);
        const Mat& logits = trace.activations.back();  // 1 x 2b
        // Logistic loss; labels: target=1, negative=0.
        double loss = 0.0;
        for (int i = 0; i < 2 * b; ++i) {
            const double label = i < b ? 1.0 : 0.0;
            const double z = logits(0, i);
            const double p = 1.0 / (1.0 + std::exp(-z));
            loss += label > 0.5 ? -std::log(std::max(p, 1e-300))
                                : -std::log(std::max(1.0 - p, 1e-300));
            cotangent(0, i) = (p - label) / (2.0 * b);
        }
        loss /= 2.0 * b;
        if (!std::isfinite(loss)) {
            throw TrainingDivergedError("discriminator: non-finite loss at step " +
                                        std::to_string(step));
        }
        backward_params(disc.net, trace, cotangent, grads, scratch);
        adam_step(disc.net, grads, adam);
    }

    // Calibrate the acceptance threshold for the configured TPR on fresh
    // target samples: accept iff score exceeds the (1 - tpr) quantile.
    Mat cal = target.sample_batch(config.calibration_samples, rng);
    Mat logits = forward_batch(disc.net, cal);
    std::vector<double> scores(static_cast<size_t>(config.calibration_samples));
    for (int i = 0; i < config.calibration_samples; ++i) {
        scores[static_cast<size_t>(i)] = 1.0 / (1.0 + std::exp(-logits(0, i)));
    }
    // "higher" quantile of the complement keeps realized TPR >= target.
    std::sort(scores.begin(), scores.end());
    const auto idx = static_cast<size_t>(
        std::floor((1.0 - config.target_tpr) * static_cast<double>(scores.size() - 1)));
    disc.accept_threshold = scores[idx];
    return disc;
}

AttackObjective discriminator_objective(const Discriminator& discriminator) {
    const Discriminator* disc = &discriminator;
    AttackObjective objective;
    objective.value = [disc](const Image& image) {
        return -std::log(std::max(disc->score(image), 1e-300));
    };
    objective.gradient = [disc](const Image& image) {
        // d/dz of -log sigmoid(z) is sigmoid(z) - 1.
        double p = disc->score(image);
        Vec cotangent(1);
        cotangent[0] = p - 1.0;
        return input_vjp(disc->net, image.pixels, cotangent);
    };
    return objective;
}

Image manipulate_pixels(const Image& image, const std::vector<int>& manipulated,
                        ManipulationMode mode, double value) {
    const double replacement = mode == ManipulationMode::Zero ? 0.0 : value;
    Image out = image;
    for (int idx : manipulated) {
        if (idx < 0 || idx >= image.pixels.size()) {
            throw InvalidArgumentError("manipulate_pixels: index " + std::to_string(idx) +
                                       " out of range for d=" + std::to_string(image.pixels.size()));
        }
        out.pixels[idx] = replacement;
    }
    return out;
}

std::vector<StabilityRow> stability_sweep(const Detector& detector, ImageSource& source,
                                          const std::vector<int>& m_values, int trials, Rng& rng) {
    const int d = detector.dim();
    for (size_t i = 0; i + 1 < m_values.size(); ++i) {
        if (m_values[i] > m_values[i + 1]) {
            throw InvalidArgumentError("stability_sweep: m_values must be sorted ascending");
        }
    }
    for (int m : m_values) {
        if (m < 0 || m >= d) throw InvalidArgumentError("stability_sweep: m must be in [0, d)");
    }
    std::vector<StabilityRow> rows;
    const int l = detector.fingerprint_length();
    std::vector<int> pool(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) pool[static_cast<size_t>(i)] = i;
    for (int m : m_values) {
        double total = 0.0;
        for (int t = 0; t < trials; ++t) {
            Image clean = source.sample(rng);
            // Uniform m-subset via partial Fisher-Yates.
            for (int j = 0; j < m; ++j) {
                const auto pick = j + static_cast<int>(rng.next_index(static_cast<uint64_t>(d - j)));
                std::swap(pool[static_cast<size_t>(j)], pool[static_cast<size_t>(pick)]);
            }
            std::vector<int> manipulated(pool.begin(), pool.begin() + m);
            Image modified = manipulate_pixels(clean, manipulated, ManipulationMode::Zero);
            Vec out_clean = forward(detector.reconstructor, clean.pixels);
            Vec out_modified = forward(detector.reconstructor, modified.pixels);
            total += (out_clean - out_modified).cwiseAbs().sum() / l;
        }
        rows.push_back({m, trials > 0 ? total / trials : 0.0});
    }
    return rows;
}

int rejection_threshold(double tau, int l, double delta) {
    if (tau < 0.0) throw InvalidArgumentError("rejection_threshold: tau must be >= 0");
    if (l < 1) throw InvalidArgumentError("rejection_threshold: l must be >= 1");
    if (!(delta > 0.0)) {
        throw InvalidArgumentError("rejection_threshold: delta must be > 0 (perturbation scale)");
    }
    return static_cast<int>(std::ceil(tau * static_cast<double>(l) / (delta * delta)));
}

double natgt_query_complexity(int d, int l, int k) {
    if (k < 1 || k > l || l >= d) {
        throw InvalidArgumentError("natgt_query_complexity: need 1 <= k <= l < d");
    }
    const double ld = static_cast<double>(l);
    const double kd = static_cast<double>(k);
    const double dd = static_cast<double>(d);
    // Evaluated in log space; the result can span hundreds of decades.
    double log_t = kd * std::log((ld + 1.0) / kd) +
                   (ld - kd + 1.0) * std::log((ld + 1.0) / (ld - kd + 1.0)) +
                   std::log(ld + 1.0) + std::log(std::log(dd / (ld + 1.0)));
    return std::exp(log_t);
}

double permutation_complexity(int l) {
    if (l < 1) throw InvalidArgumentError("permutation_complexity: l must be >= 1");
    return std::lgamma(static_cast<double>(l) + 1.0) / std::log(10.0);
}

Verdict group_test_probe(const Detector& detector, const Image& image,
                         const std::vector<int>& manipulated) {
    if (verify(detector, image) != Verdict::Authentic) {
        throw InvalidArgumentError("group_test_probe: image must verify Authentic before probing");
    }
    return verify(detector, manipulate_pixels(image, manipulated, ManipulationMode::Zero));
}

double measure_delta_sq(ImageSource& source, ManipulationMode mode, double value, int n_samples,
                        Rng& rng) {
    if (n_samples < 1) throw InvalidArgumentError("measure_delta_sq: n_samples must be >= 1");
    const double replacement = mode == ManipulationMode::Zero ? 0.0 : value;
    double total = 0.0;
    int count = 0;
    while (count < n_samples) {
        Image image = source.sample(rng);
        const int probes_per_image = std::min(16, n_samples - count);
        for (int j = 0; j < probes_per_image; ++j) {
            const auto idx = rng.next_index(static_cast<uint64_t>(image.pixels.size()));
            const double diff = image.pixels[static_cast<Eigen::Index>(idx)] - replacement;
            total += diff * diff;
            ++count;
        }
    }
    return total / n_samples;
}

Distortion measure_distortion(const Image& original, const Image& modified) {
    if (original.pixels.size() != modified.pixels.size()) {
        throw InvalidArgumentError("measure_distortion: size mismatch");
    }
    Distortion dist;
    Vec diff = modified.pixels - original.pixels;
    dist.linf = diff.cwiseAbs().maxCoeff();
    dist.l2 = diff.norm();

    // Mean SSIM over 8x8 windows on each channel, standard constants for
    // unit dynamic range.
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const ImageShape& s = original.shape;
    const int win = 8;
    double total = 0.0;
    int windows = 0;
    for (int c = 0; c < s.channels; ++c) {
        for (int y0 = 0; y0 + win <= s.height; y0 += win) {
            for (int x0 = 0; x0 + win <= s.width; x0 += win) {
                double ma = 0, mb = 0;
                for (int y = y0; y < y0 + win; ++y) {
                    for (int x = x0; x < x0 + win; ++x) {
                        ma += original.at(c, y, x);
                        mb += modified.at(c, y, x);
                    }
                }
                const int n = win * win;
                ma /= n;
                mb /= n;
                double va = 0, vb = 0, cov = 0;
                for (int y = y0; y < y0 + win; ++y) {
                    for (int x = x0; x < x0 + win; ++x) {
                        const double da = original.at(c, y, x) - ma;
                        const double db = modified.at(c, y, x) - mb;
                        va += da * da;
                        vb += db * db;
                        cov += da * db;
                    }
                }
                va /= n - 1;
                vb /= n - 1;
                cov /= n - 1;
                total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                         ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++windows;
            }
        }
    }
    dist.ssim_proxy = windows > 0 ? total / windows : 1.0;
    return dist;
}

}  // namespace authfp
