#pragma once

#include <cstdint>
#include <vector>

#include "authfp/image.hpp"
#include "authfp/network.hpp"
#include "authfp/rng.hpp"

namespace authfp {

enum class IndexSampling { WithReplacement, WithoutReplacement };

/// The secret ordered fingerprint indices s: l flat offsets into the
/// (C,H,W) row-major pixel layout. Order is significant. This value is
/// detector-private and must never reach a service response or report.
struct IndexVector {
    std::vector<uint32_t> indices;
    int dim = 0;  // image dimension d the indices address

    int length() const { return static_cast<int>(indices.size()); }
};

/// Draws s uniformly. WithReplacement matches the uniform distribution over
/// [d]^l literally (duplicates possible); WithoutReplacement draws a uniform
/// l-subset in uniform random order and requires l <= d.
IndexVector sample_index_vector(int dim, int length, Rng& rng,
                                IndexSampling mode = IndexSampling::WithReplacement);

/// Pixel values at the secret indices, order preserving.
struct FingerprintValues {
    Vec values;
};

FingerprintValues extract_fingerprint(const Image& image, const IndexVector& s);

/// Column j of the result holds the fingerprint of image column j.
Mat extract_fingerprint_batch(const Eigen::Ref<const Mat>& images, const IndexVector& s);

}  // namespace authfp
