#pragma once

#include <cstdint>
#include <string_view>

namespace authfp {

/// Counter-based deterministic PRNG.
///
/// Output i is the SplitMix64 finalizer applied to an affine walk over a key
/// derived from (seed, stream). The full generator state is (seed, stream,
/// counter): identical triples replay identical sequences across runs, and
/// the counter can be saved/restored to checkpoint a stream. Distinct stream
/// ids give statistically independent sequences from one seed.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0);

    uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit();

    /// Standard normal draw via Box-Muller. Consumes exactly two counter
    /// steps per call so the state stays a pure (seed, stream, counter)
    /// triple; the second Box-Muller output is discarded.
    double next_gaussian();

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    uint64_t next_index(uint64_t n);

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }
    uint64_t counter() const { return counter_; }
    void set_counter(uint64_t c) { counter_ = c; }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t key_;
    uint64_t counter_ = 0;
};

/// Stage-seed fan-out: hash (master seed, stage name, cell coordinates) so
/// adding a sweep cell never perturbs the seeds of existing cells.
uint64_t derive_seed(uint64_t master, std::string_view stage);
uint64_t derive_seed(uint64_t master, std::string_view stage, uint64_t cell);
uint64_t derive_seed(uint64_t master, std::string_view stage, uint64_t cell_a, uint64_t cell_b);

}  // namespace authfp
