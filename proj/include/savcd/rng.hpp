#pragma once

#include <cstdint>
#include <random>

namespace savcd {

// Deterministic random stream used everywhere randomness is needed.
//
// Backed by std::mt19937_64, whose output sequence is fully specified by the
// C++ standard, so identical seeds give identical streams on every platform.
// Standard-library distributions are deliberately avoided (their draw
// sequences are implementation-defined); all mappings from raw 64-bit words
// to uniforms, bounded integers, and Gaussians are implemented here.
class SampleRng {
public:
    explicit SampleRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53-bit resolution, one engine draw.
    double next_unit();

    // Uniform integer in [0, n), n >= 1. Fixed-point multiply keeps the
    // mapping portable; one engine draw.
    std::uint64_t next_below(std::uint64_t n);

    // Standard normal via Box-Muller; draws two words per pair, caches the
    // second value.
    double next_gaussian();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Splitmix64 finalizer; decorrelates seeds for independent streams
// (e.g. the augmentation stream vs. the token sampler) derived from one
// user-facing seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace savcd
