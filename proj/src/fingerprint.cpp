#include "authfp/fingerprint.hpp"

#include <string>

#include "authfp/errors.hpp"

namespace authfp {

IndexVector sample_index_vector(int dim, int length, Rng& rng, IndexSampling mode) {
    if (dim < 1 || length < 1) {
        throw InvalidArgumentError("sample_index_vector: dim and length must be >= 1");
    }
    IndexVector s;
    s.dim = dim;
    s.indices.reserve(static_cast<size_t>(length));
    if (mode == IndexSampling::WithReplacement) {
        for (int j = 0; j < length; ++j) {
            s.indices.push_back(static_cast<uint32_t>(rng.next_index(static_cast<uint64_t>(dim))));
        }
    } else {
        if (length > dim) {
            throw InvalidArgumentError("sample_index_vector: without-replacement needs l <= d (" +
                                       std::to_string(length) + " > " + std::to_string(dim) + ")");
        }
        // Partial Fisher-Yates: first l entries are a uniform ordered l-subset.
        std::vector<uint32_t> pool(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i) pool[static_cast<size_t>(i)] = static_cast<uint32_t>(i);
        for (int j = 0; j < length; ++j) {
            const auto pick = j + static_cast<int>(rng.next_index(static_cast<uint64_t>(dim - j)));
            std::swap(pool[static_cast<size_t>(j)], pool[static_cast<size_t>(pick)]);
            s.indices.push_back(pool[static_cast<size_t>(j)]);
        }
    }
    return s;
}

FingerprintValues extract_fingerprint(const Image& image, const IndexVector& s) {
    if (s.dim != image.shape.dim() || image.pixels.size() != s.dim) {
        throw ShapeError("extract_fingerprint: index vector addresses d=" + std::to_string(s.dim) +
                         " but image has d=" + std::to_string(image.shape.dim()));
    }
    FingerprintValues f;
    f.values.resize(s.length());
    for (int j = 0; j < s.length(); ++j) {
        const uint32_t idx = s.indices[static_cast<size_t>(j)];
        if (idx >= image.pixels.size()) {
            throw Error("extract_fingerprint: corrupted detector, index " + std::to_string(idx) +
                        " out of range for d=" + std::to_string(s.dim));
        }
        f.values[j] = image.pixels[idx];
    }
    return f;
}

Mat extract_fingerprint_batch(const Eigen::Ref<const Mat>& images, const IndexVector& s) {
    if (images.rows() != s.dim) {
        throw ShapeError("extract_fingerprint_batch: images have d=" +
                         std::to_string(images.rows()) + ", index vector addresses d=" +
                         std::to_string(s.dim));
    }
    Mat out(s.length(), images.cols());
    for (int j = 0; j < s.length(); ++j) {
        out.row(j) = images.row(s.indices[static_cast<size_t>(j)]);
    }
    return out;
}

}  // namespace authfp
