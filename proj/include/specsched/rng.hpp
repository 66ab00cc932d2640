#pragma once

#include <cstdint>
#include <random>

namespace specsched {

// Deterministic random stream with the variate generators the noise model
// needs. All samplers are hand-rolled on top of mt19937_64 so that a given
// (seed, call sequence) produces the same variates on every platform; the
// standard library's distribution objects make no such guarantee.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    // Child stream keyed by (master seed, a, b), e.g. (seed, grid index,
    // patch index). Uses splitmix64 finalization so nearby keys decorrelate.
    static RandomStream derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

    std::uint64_t next_u64() { return gen_(); }

    // Unbiased integer in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n);

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (one variate per pair of uniforms).
    double normal();

    // Gamma(shape, rate=1) by Marsaglia-Tsang squeeze/rejection; shape >= 1
    // is the fast path, shape < 1 falls back to the boosting identity.
    double gamma(double shape);

    long long poisson(double rate);

private:
    std::mt19937_64 gen_;
};

}  // namespace specsched
