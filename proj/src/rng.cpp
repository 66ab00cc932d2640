#include "specsched/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace specsched {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RandomStream RandomStream::derive(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (a + 0x632be59bd9b4e019ULL));
    s = splitmix64(s ^ (b + 0x9e6c63d0876a9a47ULL));
    return RandomStream(s);
}

std::uint64_t RandomStream::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RandomStream::below: n must be >= 1");
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

double RandomStream::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double RandomStream::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
        // Gamma(k) = Gamma(k+1) * U^(1/k)
        const double g = gamma(shape + 1.0);
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

namespace {

// Hormann's PTRS transformed rejection, valid for mean >= 10.
long long poisson_ptrs(RandomStream& rs, double mu) {
    const double b = 0.931 + 2.53 * std::sqrt(mu);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mu);
    for (;;) {
        const double u = rs.uniform() - 0.5;
        const double v = rs.uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const long long k = static_cast<long long>(kf);
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = kf * log_mu - mu - std::lgamma(kf + 1.0);
        if (lhs <= rhs) return k;
    }
}

long long poisson_inversion(RandomStream& rs, double mu) {
    const double threshold = std::exp(-mu);
    long long k = 0;
    double prod = rs.uniform();
    while (prod > threshold) {
        ++k;
        prod *= rs.uniform();
    }
    return k;
}

}  // namespace

long long RandomStream::poisson(double rate) {
    if (!std::isfinite(rate) || rate < 0.0)
        throw std::invalid_argument("poisson: rate must be finite and nonnegative");
    if (rate == 0.0) return 0;
    if (rate < 10.0) return poisson_inversion(*this, rate);
    if (rate <= 1.0e3) return poisson_ptrs(*this, rate);
    // Large-rate normal approximation N(mu, mu); relative moment error is
    // negligible above 1e3.
    const double x = std::round(rate + std::sqrt(rate) * normal());
    return x < 0.0 ? 0 : static_cast<long long>(x);
}

}  // namespace specsched
