#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "authfp/image.hpp"
#include "authfp/network.hpp"
#include "authfp/rng.hpp"

namespace authfp {

/// One modification applied to a base generator. perturb / quantize / prune
/// act on the generator weights; downsample post-processes output images.
struct VariantOp {
    enum class Kind { Perturb, Quantize, Prune, Downsample };

    Kind kind;
    double sigma = 0.0;   // perturb: relative weight-noise scale
    int bits = 0;         // quantize: 2..16
    double ratio = 0.0;   // prune: fraction of weights zeroed, [0,1)
    int resolution = 0;   // downsample: target resolution <= height

    static VariantOp perturb(double sigma);
    static VariantOp quantize(int bits);
    static VariantOp prune(double ratio);
    static VariantOp downsample(int resolution);

    std::string label() const;
};

/// Full parameterization of a synthetic generator: a seeded two-layer
/// network (k -> h -> d, tanh output mapped onto [0,1]) followed by a
/// seeded per-channel smoothing convolution, plus an ordered variant chain.
/// The smoothing stage is what gives outputs model-specific local pixel
/// dependencies.
struct GeneratorSpec {
    uint64_t seed = 0;
    int latent_dim = 64;
    ImageShape shape{1, 32, 32};
    int hidden_width = 256;
    int kernel_size = 3;  // odd
    std::vector<VariantOp> variants;

    int dim() const { return shape.dim(); }
    std::string label() const;
    void validate() const;
};

/// Returns a copy of `spec` with `op` appended to the variant chain.
GeneratorSpec apply_variant(const GeneratorSpec& spec, const VariantOp& op);

struct LatentInput {
    Vec xi;
    std::optional<std::string> condition;  // carried, unused by synthetic generators
};

/// Anything that can produce images for certification / evaluation: the
/// synthetic generator or a corpus replay. Sources are not required to be
/// thread-safe; give each worker its own instance (corpus replay holds a
/// cursor and must be externally serialized if shared).
class ImageSource {
public:
    virtual ~ImageSource() = default;
    virtual ImageShape shape() const = 0;
    virtual Image sample(Rng& rng) = 0;
    /// Samples into the columns of a preallocated dim x n buffer.
    virtual void sample_batch_into(Eigen::Ref<Mat> out, Rng& rng);
    /// Samples as columns of a dim x n matrix.
    Mat sample_batch(int n, Rng& rng);
};

/// GeneratorSpec compiled into an evaluatable function: weight-space variant
/// ops are folded into the weights once; output-space ops replay per image.
class SyntheticGenerator : public ImageSource {
public:
    explicit SyntheticGenerator(const GeneratorSpec& spec);

    const GeneratorSpec& spec() const { return spec_; }
    ImageShape shape() const override { return spec_.shape; }

    LatentInput sample_latent(Rng& rng) const;
    Image generate(const LatentInput& latent) const;

    Image sample(Rng& rng) override;
    void sample_batch_into(Eigen::Ref<Mat> out, Rng& rng) override;

    /// Effective weights after the variant chain (exposed for tests).
    const Mat& hidden_weights() const { return w1_; }
    const Mat& output_weights() const { return w2_; }
    const Mat& smoothing_kernel() const { return kernel_; }

private:
    Vec raw_pixels(const Eigen::Ref<const Vec>& xi) const;
    void postprocess_into(const Eigen::Ref<const Vec>& raw, Eigen::Ref<Vec> out) const;

    GeneratorSpec spec_;
    Mat w1_;
    Vec b1_;
    Mat w2_;
    Vec b2_;
    Mat kernel_;
    std::vector<VariantOp> output_ops_;

    // Batch scratch, reused across sample_batch_into calls.
    Mat latents_;
    Mat hidden_;
    Mat raw_;
};

/// Convenience wrappers matching the one-shot call shape.
LatentInput sample_latent(const GeneratorSpec& spec, Rng& rng);
Image generate(const GeneratorSpec& spec, const LatentInput& latent);

/// Replays PGM/PPM files from a directory in sorted-name order, cycling.
/// Pixels are normalized to [0,1]. Holds a cursor; not thread-safe.
class CorpusSource : public ImageSource {
public:
    explicit CorpusSource(const std::string& directory);

    ImageShape shape() const override { return shape_; }
    Image sample(Rng& rng) override;
    size_t file_count() const { return files_.size(); }

private:
    std::vector<std::string> files_;
    ImageShape shape_;
    size_t cursor_ = 0;
};

std::unique_ptr<CorpusSource> load_corpus_generator(const std::string& directory);

/// Per-channel 2D convolution with reflect-101 padding. Exposed for tests.
Vec convolve_reflect(const Eigen::Ref<const Vec>& pixels, const ImageShape& shape,
                     const Eigen::Ref<const Mat>& kernel);

/// Average-pool each channel to r x r, then bilinearly resize back to H x W.
Vec downsample_pixels(const Eigen::Ref<const Vec>& pixels, const ImageShape& shape, int resolution);

}  // namespace authfp
