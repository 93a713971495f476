#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "authfp/errors.hpp"
#include "authfp/fingerprint.hpp"

using namespace authfp;

TEST_CASE("d=1 with replacement can only produce zeros") {
    Rng rng(1);
    IndexVector s = sample_index_vector(1, 3, rng, IndexSampling::WithReplacement);
    REQUIRE(s.length() == 3);
    for (uint32_t idx : s.indices) CHECK(idx == 0);
}

TEST_CASE("d=4, l=4 without replacement is a permutation of {0..3}") {
    Rng rng(2);
    IndexVector s = sample_index_vector(4, 4, rng, IndexSampling::WithoutReplacement);
    std::vector<uint32_t> sorted = s.indices;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<uint32_t>{0, 1, 2, 3});
}

TEST_CASE("without replacement requires l <= d") {
    Rng rng(3);
    CHECK_THROWS_AS((void)sample_index_vector(4, 5, rng, IndexSampling::WithoutReplacement),
                    InvalidArgumentError);
}

TEST_CASE("inclusion frequency is uniform within 3 sigma of binomial") {
    const int d = 1024, l = 32, trials = 1000;
    Rng rng(42);
    std::vector<int> hits(d, 0);
    for (int t = 0; t < trials; ++t) {
        IndexVector s = sample_index_vector(d, l, rng);
        for (uint32_t idx : s.indices) ++hits[idx];
    }
    // Each of the l*trials draws hits a fixed index with p = 1/d.
    const double n_draws = static_cast<double>(l) * trials;
    const double expect = n_draws / d;
    const double sigma = std::sqrt(n_draws * (1.0 / d) * (1.0 - 1.0 / d));
    int outliers = 0;
    for (int i = 0; i < d; ++i) {
        if (std::abs(hits[i] - expect) > 3.0 * sigma) ++outliers;
    }
    // ~0.27% of cells may exceed 3 sigma by chance; allow generous slack.
    CHECK(outliers < d / 50);
}

TEST_CASE("extraction reads exact pixels in index order") {
    Image img;
    img.shape = {1, 1, 3};
    img.pixels = Vec::Zero(3);
    img.pixels << 0.1, 0.2, 0.3;

    IndexVector s;
    s.dim = 3;
    s.indices = {2, 0};
    FingerprintValues f = extract_fingerprint(img, s);
    REQUIRE(f.values.size() == 2);
    CHECK(f.values[0] == 0.3);
    CHECK(f.values[1] == 0.1);
}

TEST_CASE("constant image extracts constant fingerprint") {
    Image img;
    img.shape = {1, 2, 2};
    img.pixels = Vec::Constant(4, 0.5);
    IndexVector s;
    s.dim = 4;
    s.indices = {3, 1, 1};
    FingerprintValues f = extract_fingerprint(img, s);
    for (int j = 0; j < f.values.size(); ++j) CHECK(f.values[j] == 0.5);
}

TEST_CASE("permutation equivariance of extraction") {
    Rng rng(9);
    Image img;
    img.shape = {1, 4, 4};
    img.pixels = Vec::NullaryExpr(16, [&]() { return rng.next_unit(); });
    IndexVector s = sample_index_vector(16, 6, rng);

    // A fixed permutation pi applied to s.
    std::vector<int> pi = {3, 0, 5, 1, 4, 2};
    IndexVector permuted;
    permuted.dim = s.dim;
    for (int j : pi) permuted.indices.push_back(s.indices[static_cast<size_t>(j)]);

    FingerprintValues f = extract_fingerprint(img, s);
    FingerprintValues g = extract_fingerprint(img, permuted);
    for (size_t j = 0; j < pi.size(); ++j) {
        CHECK(g.values[static_cast<Eigen::Index>(j)] == f.values[pi[j]]);
    }
}

TEST_CASE("extraction validates image dimension against the index vector") {
    Image img;
    img.shape = {1, 2, 2};
    img.pixels = Vec::Zero(4);
    IndexVector s;
    s.dim = 5;
    s.indices = {0};
    CHECK_THROWS_AS((void)extract_fingerprint(img, s), ShapeError);
}

TEST_CASE("batch extraction matches per-image extraction") {
    Rng rng(77);
    const int d = 12, l = 4, n = 5;
    Mat images = Mat::NullaryExpr(d, n, [&]() { return rng.next_unit(); });
    IndexVector s = sample_index_vector(d, l, rng);
    Mat batch = extract_fingerprint_batch(images, s);
    for (int i = 0; i < n; ++i) {
        Image img;
        img.shape = {1, 1, d};
        img.pixels = images.col(i);
        FingerprintValues f = extract_fingerprint(img, s);
        CHECK(batch.col(i) == f.values);
    }
}
