#include "authfp/generators.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "authfp/errors.hpp"
#include "authfp/image_io.hpp"

namespace authfp {

VariantOp VariantOp::perturb(double sigma) {
    if (sigma < 0.0 || !std::isfinite(sigma)) {
        throw InvalidArgumentError("perturb: sigma must be finite and >= 0");
    }
    VariantOp op;
    op.kind = Kind::Perturb;
    op.sigma = sigma;
    return op;
}

VariantOp VariantOp::quantize(int bits) {
    if (bits < 2 || bits > 16) {
        throw InvalidArgumentError("quantize: bits must be in [2,16], got " + std::to_string(bits));
    }
    VariantOp op;
    op.kind = Kind::Quantize;
    op.bits = bits;
    return op;
}

VariantOp VariantOp::prune(double ratio) {
    if (!(ratio >= 0.0 && ratio < 1.0)) {
        throw InvalidArgumentError("prune: ratio must be in [0,1), got " + std::to_string(ratio));
    }
    VariantOp op;
    op.kind = Kind::Prune;
    op.ratio = ratio;
    return op;
}

VariantOp VariantOp::downsample(int resolution) {
    if (resolution < 1) {
        throw InvalidArgumentError("downsample: resolution must be >= 1");
    }
    VariantOp op;
    op.kind = Kind::Downsample;
    op.resolution = resolution;
    return op;
}

std::string VariantOp::label() const {
    char buf[48];
    switch (kind) {
        case Kind::Perturb:
            std::snprintf(buf, sizeof(buf), "perturb(%g)", sigma);
            break;
        case Kind::Quantize:
            std::snprintf(buf, sizeof(buf), "quantize(%d)", bits);
            break;
        case Kind::Prune:
            std::snprintf(buf, sizeof(buf), "prune(%g)", ratio);
            break;
        case Kind::Downsample:
            std::snprintf(buf, sizeof(buf), "downsample(%d)", resolution);
            break;
    }
    return buf;
}

std::string GeneratorSpec::label() const {
    std::string s = "gen(seed=" + std::to_string(seed) + "," + to_string(shape) + ")";
    for (const VariantOp& op : variants) s += "+" + op.label();
    return s;
}

void GeneratorSpec::validate() const {
    if (latent_dim < 1) throw InvalidArgumentError("generator: latent_dim must be >= 1");
    if (hidden_width < 1) throw InvalidArgumentError("generator: hidden_width must be >= 1");
    if (shape.channels < 1 || shape.height < 1 || shape.width < 1) {
        throw InvalidArgumentError("generator: invalid image shape " + to_string(shape));
    }
    if (kernel_size < 1 || kernel_size % 2 == 0) {
        throw InvalidArgumentError("generator: kernel_size must be odd and >= 1");
    }
    if (kernel_size / 2 >= shape.height || kernel_size / 2 >= shape.width) {
        throw InvalidArgumentError("generator: kernel radius exceeds image size");
    }
    for (const VariantOp& op : variants) {
        if (op.kind == VariantOp::Kind::Downsample && op.resolution > shape.height) {
            throw InvalidArgumentError("downsample: resolution " + std::to_string(op.resolution) +
                                       " exceeds image height " + std::to_string(shape.height));
        }
    }
}

GeneratorSpec apply_variant(const GeneratorSpec& spec, const VariantOp& op) {
    GeneratorSpec out = spec;
    out.variants.push_back(op);
    out.validate();
    return out;
}

namespace {

// Streams used to derive the generator's tensors from its seed.
enum : uint64_t { kStreamW1 = 1, kStreamB1 = 2, kStreamW2 = 3, kStreamB2 = 4, kStreamKernel = 5 };

Mat seeded_gaussian(int rows, int cols, double std_dev, uint64_t seed, uint64_t stream) {
    Rng rng(seed, stream);
    return Mat::NullaryExpr(rows, cols, [&]() { return std_dev * rng.next_gaussian(); });
}

template <typename TensorT>
void quantize_tensor(TensorT& w, int bits) {
    const double lo = w.minCoeff();
    const double hi = w.maxCoeff();
    if (hi <= lo) return;
    const double intervals = static_cast<double>((1 << bits) - 1);  // 2^bits values
    const double step = (hi - lo) / intervals;
    // Endpoint levels snap to the exact min/max so the grid (and therefore
    // the whole map) reproduces itself bit-exactly on requantization.
    w = w.unaryExpr([&](double v) {
        const double level = std::round((v - lo) / step);
        if (level <= 0.0) return lo;
        if (level >= intervals) return hi;
        return lo + level * step;
    });
}

template <typename TensorT>
void prune_tensor(TensorT& w, double ratio) {
    const auto n = static_cast<size_t>(w.size());
    const size_t zeros = static_cast<size_t>(std::floor(ratio * static_cast<double>(n)));
    if (zeros == 0) return;
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Smallest magnitude first; ties broken by flat index for determinism.
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        double ma = std::abs(w.data()[a]), mb = std::abs(w.data()[b]);
        return ma != mb ? ma < mb : a < b;
    });
    for (size_t i = 0; i < zeros; ++i) w.data()[order[i]] = 0.0;
}

template <typename TensorT>
void perturb_tensor(TensorT& w, double sigma, uint64_t seed, uint64_t op_index,
                    uint64_t tensor_id) {
    if (sigma == 0.0) return;
    const double n = static_cast<double>(w.size());
    double mean = w.sum() / n;
    double var = (w.array() - mean).square().sum() / n;
    const double noise_std = sigma * std::sqrt(var);
    Rng rng(derive_seed(seed, "variant-perturb", op_index, tensor_id));
    w = w.unaryExpr([&](double v) { return v + noise_std * rng.next_gaussian(); });
}

}  // namespace

SyntheticGenerator::SyntheticGenerator(const GeneratorSpec& spec) : spec_(spec) {
    spec_.validate();
    const int k = spec_.latent_dim;
    const int h = spec_.hidden_width;
    const int d = spec_.dim();

    // Scales chosen so the pre-tanh activations have roughly unit variance
    // and the pixel histogram covers most of [0,1].
    w1_ = seeded_gaussian(h, k, 1.0 / std::sqrt(static_cast<double>(k)), spec_.seed, kStreamW1);
    b1_ = seeded_gaussian(h, 1, 0.3, spec_.seed, kStreamB1);
    w2_ = seeded_gaussian(d, h, std::sqrt(2.0 / static_cast<double>(h)), spec_.seed, kStreamW2);
    b2_ = seeded_gaussian(d, 1, 0.3, spec_.seed, kStreamB2);

    // Non-negative kernel normalized to sum 1: smoothing never leaves [0,1].
    const int ks = spec_.kernel_size;
    Rng krng(spec_.seed, kStreamKernel);
    kernel_ = Mat::NullaryExpr(ks, ks, [&]() { return 0.05 + krng.next_unit(); });
    kernel_ /= kernel_.sum();

    for (size_t i = 0; i < spec_.variants.size(); ++i) {
        const VariantOp& op = spec_.variants[i];
        switch (op.kind) {
            case VariantOp::Kind::Perturb:
                perturb_tensor(w1_, op.sigma, spec_.seed, i, 0);
                perturb_tensor(b1_, op.sigma, spec_.seed, i, 1);
                perturb_tensor(w2_, op.sigma, spec_.seed, i, 2);
                perturb_tensor(b2_, op.sigma, spec_.seed, i, 3);
                break;
            case VariantOp::Kind::Quantize:
                quantize_tensor(w1_, op.bits);
                quantize_tensor(b1_, op.bits);
                quantize_tensor(w2_, op.bits);
                quantize_tensor(b2_, op.bits);
                break;
            case VariantOp::Kind::Prune:
                prune_tensor(w1_, op.ratio);
                prune_tensor(w2_, op.ratio);
                break;
            case VariantOp::Kind::Downsample:
                output_ops_.push_back(op);
                break;
        }
    }
}

LatentInput SyntheticGenerator::sample_latent(Rng& rng) const {
    LatentInput latent;
    latent.xi = Vec::NullaryExpr(spec_.latent_dim, [&]() { return rng.next_gaussian(); });
    return latent;
}

Vec SyntheticGenerator::raw_pixels(const Eigen::Ref<const Vec>& xi) const {
    Vec hidden = w1_ * xi + b1_;
    hidden = hidden.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
    Vec z = w2_ * hidden + b2_;
    // (tanh(z)+1)/2 == sigmoid(2z); the exp form vectorizes for doubles.
    return (1.0 / (1.0 + (-2.0 * z.array()).exp())).matrix();
}

void SyntheticGenerator::postprocess_into(const Eigen::Ref<const Vec>& raw,
                                          Eigen::Ref<Vec> out) const {
    Vec pixels = convolve_reflect(raw, spec_.shape, kernel_);
    for (const VariantOp& op : output_ops_) {
        pixels = downsample_pixels(pixels, spec_.shape, op.resolution);
    }
    out = pixels.cwiseMax(0.0).cwiseMin(1.0);
}

Image SyntheticGenerator::generate(const LatentInput& latent) const {
    if (latent.xi.size() != spec_.latent_dim) {
        throw InvalidArgumentError("generate: latent size " + std::to_string(latent.xi.size()) +
                                   " != latent_dim " + std::to_string(spec_.latent_dim));
    }
    Image image;
    image.shape = spec_.shape;
    image.pixels.resize(spec_.dim());
    postprocess_into(raw_pixels(latent.xi), image.pixels);
    return image;
}

Image SyntheticGenerator::sample(Rng& rng) {
    return generate(sample_latent(rng));
}

void ImageSource::sample_batch_into(Eigen::Ref<Mat> out, Rng& rng) {
    if (out.rows() != shape().dim() || out.cols() <= 0) {
        throw InvalidArgumentError("sample_batch: output buffer has wrong shape");
    }
    for (int i = 0; i < out.cols(); ++i) out.col(i) = sample(rng).pixels;
}

Mat ImageSource::sample_batch(int n, Rng& rng) {
    if (n <= 0) throw InvalidArgumentError("sample_batch: n must be positive");
    Mat out(shape().dim(), n);
    sample_batch_into(out, rng);
    return out;
}

void SyntheticGenerator::sample_batch_into(Eigen::Ref<Mat> out, Rng& rng) {
    const int n = static_cast<int>(out.cols());
    if (out.rows() != spec_.dim() || n <= 0) {
        throw InvalidArgumentError("sample_batch: output buffer has wrong shape");
    }
    latents_.resize(spec_.latent_dim, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < spec_.latent_dim; ++j) latents_(j, i) = rng.next_gaussian();
    }
    hidden_.noalias() = w1_ * latents_;
    hidden_.colwise() += b1_;
    hidden_ = hidden_.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
    raw_.noalias() = w2_ * hidden_;
    raw_.colwise() += b2_;
    raw_ = (1.0 / (1.0 + (-2.0 * raw_.array()).exp())).matrix();
    for (int i = 0; i < n; ++i) postprocess_into(raw_.col(i), out.col(i));
}

LatentInput sample_latent(const GeneratorSpec& spec, Rng& rng) {
    return SyntheticGenerator(spec).sample_latent(rng);
}

Image generate(const GeneratorSpec& spec, const LatentInput& latent) {
    return SyntheticGenerator(spec).generate(latent);
}

Vec convolve_reflect(const Eigen::Ref<const Vec>& pixels, const ImageShape& shape,
                     const Eigen::Ref<const Mat>& kernel) {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const int H = shape.height, W = shape.width;
    const int kh = static_cast<int>(kernel.rows()), kw = static_cast<int>(kernel.cols());
    const int ry = kh / 2, rx = kw / 2;
    Vec out(pixels.size());
    RowMat padded(H + 2 * ry, W + 2 * rx);
    for (int c = 0; c < shape.channels; ++c) {
        const int base = c * H * W;
        Eigen::Map<const RowMat> img(pixels.data() + base, H, W);
        padded.block(ry, rx, H, W) = img;
        // reflect-101 padding: index -1 mirrors to 1, H mirrors to H-2.
        for (int i = 1; i <= ry; ++i) {
            padded.block(ry - i, rx, 1, W) = padded.block(ry + i, rx, 1, W);
            padded.block(ry + H - 1 + i, rx, 1, W) = padded.block(ry + H - 1 - i, rx, 1, W);
        }
        for (int j = 1; j <= rx; ++j) {
            padded.col(rx - j) = padded.col(rx + j);
            padded.col(rx + W - 1 + j) = padded.col(rx + W - 1 - j);
        }
        Eigen::Map<RowMat> dst(out.data() + base, H, W);
        dst.setZero();
        for (int dy = 0; dy < kh; ++dy) {
            for (int dx = 0; dx < kw; ++dx) {
                dst += kernel(dy, dx) * padded.block(dy, dx, H, W);
            }
        }
    }
    return out;
}

Vec downsample_pixels(const Eigen::Ref<const Vec>& pixels, const ImageShape& shape,
                      int resolution) {
    const int H = shape.height, W = shape.width, r = resolution;
    if (r > H || r > W) {
        throw InvalidArgumentError("downsample: resolution exceeds image size");
    }
    Vec out(pixels.size());
    for (int c = 0; c < shape.channels; ++c) {
        const int base = c * H * W;
        // Box-average pool onto an r x r grid.
        Mat pooled(r, r);
        for (int py = 0; py < r; ++py) {
            const int y0 = py * H / r, y1 = std::max(y0 + 1, (py + 1) * H / r);
            for (int px = 0; px < r; ++px) {
                const int x0 = px * W / r, x1 = std::max(x0 + 1, (px + 1) * W / r);
                double acc = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) acc += pixels[base + y * W + x];
                pooled(py, px) = acc / ((y1 - y0) * (x1 - x0));
            }
        }
        // Bilinear resize back, half-pixel centers.
        for (int y = 0; y < H; ++y) {
            double fy = (y + 0.5) * r / H - 0.5;
            int y0 = static_cast<int>(std::floor(fy));
            double wy = fy - y0;
            int ya = std::clamp(y0, 0, r - 1), yb = std::clamp(y0 + 1, 0, r - 1);
            for (int x = 0; x < W; ++x) {
                double fx = (x + 0.5) * r / W - 0.5;
                int x0 = static_cast<int>(std::floor(fx));
                double wx = fx - x0;
                int xa = std::clamp(x0, 0, r - 1), xb = std::clamp(x0 + 1, 0, r - 1);
                out[base + y * W + x] = (1 - wy) * ((1 - wx) * pooled(ya, xa) + wx * pooled(ya, xb)) +
                                        wy * ((1 - wx) * pooled(yb, xa) + wx * pooled(yb, xb));
            }
        }
    }
    return out;
}

CorpusSource::CorpusSource(const std::string& directory) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(directory)) {
        throw InvalidArgumentError("corpus: '" + directory + "' is not a directory");
    }
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") files_.push_back(entry.path().string());
    }
    if (files_.empty()) {
        throw InvalidArgumentError("corpus: no .pgm/.ppm files in '" + directory + "'");
    }
    std::sort(files_.begin(), files_.end());
    shape_ = load_pnm(files_.front()).shape;
}

Image CorpusSource::sample(Rng&) {
    Image image = load_pnm(files_[cursor_]);
    if (!(image.shape == shape_)) {
        throw IngestionError("corpus file '" + files_[cursor_] + "' has shape " +
                             to_string(image.shape) + ", expected " + to_string(shape_));
    }
    cursor_ = (cursor_ + 1) % files_.size();
    return image;
}

std::unique_ptr<CorpusSource> load_corpus_generator(const std::string& directory) {
    return std::make_unique<CorpusSource>(directory);
}

}  // namespace authfp
