#include "authfp/rng.hpp"

#include <cmath>

namespace authfp {
namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

uint64_t make_key(uint64_t seed, uint64_t stream) {
    return mix64(mix64(seed + kGolden) ^ mix64(stream + 0x632BE59BD9B4E019ull));
}

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream)
    : seed_(seed), stream_(stream), key_(make_key(seed, stream)) {}

uint64_t Rng::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double Rng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_gaussian() {
    // u1 in (0,1] so the log is finite.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t Rng::next_index(uint64_t n) {
    if (n == 0) return 0;
    uint64_t limit = (0ull - n) % n;  // 2^64 mod n
    for (;;) {
        uint64_t v = next_u64();
        if (v >= limit) return v % n;
    }
}

uint64_t derive_seed(uint64_t master, std::string_view stage) {
    // FNV-1a over the stage name, then mixed with the master seed.
    uint64_t h = 0xCBF29CE484222325ull;
    for (char c : stage) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return mix64(mix64(master + kGolden) ^ h);
}

uint64_t derive_seed(uint64_t master, std::string_view stage, uint64_t cell) {
    return mix64(derive_seed(master, stage) + cell * kGolden);
}

uint64_t derive_seed(uint64_t master, std::string_view stage, uint64_t cell_a, uint64_t cell_b) {
    return mix64(derive_seed(master, stage, cell_a) ^ mix64(cell_b + kGolden));
}

}  // namespace authfp
