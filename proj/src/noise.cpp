#include "specsched/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace specsched {

Specification Specification::gaussian(double sigma) {
    Specification s;
    s.sigma = sigma;
    s.sigma_active = true;
    return s;
}

Specification Specification::poisson(double alpha) {
    Specification s;
    s.alpha = alpha;
    s.alpha_active = true;
    return s;
}

Specification Specification::speckle(double beta) {
    Specification s;
    s.beta = beta;
    s.beta_active = true;
    return s;
}

void Specification::validate(const SpeckleConfig& cfg) const {
    if (!std::isfinite(sigma) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw std::invalid_argument("Specification: non-finite parameter");
    if (sigma_active && sigma < 0.0)
        throw std::invalid_argument("Specification: sigma must be >= 0");
    if (alpha_active && alpha <= 0.0)
        throw std::invalid_argument("Specification: alpha must be > 0");
    if (beta_active && (beta < 1.0 || beta > cfg.B))
        throw std::invalid_argument("Specification: beta must lie in [1, B]");
    if (cfg.B < 1.0) throw std::invalid_argument("SpeckleConfig: B must be >= 1");
}

std::vector<double> sample_speckle_field(std::size_t count, double beta,
                                         const SpeckleConfig& cfg, RandomStream& rng) {
    if (!std::isfinite(beta) || beta < 1.0 || beta > cfg.B)
        throw std::invalid_argument("sample_speckle_field: beta must lie in [1, B]");
    const double shape = cfg.B / beta;  // shape = rate
    std::vector<double> field(count);
    for (auto& w : field) w = rng.gamma(shape) / shape;
    return field;
}

ImagePatch corrupt(const ImagePatch& x, const Specification& theta,
                   const SpeckleConfig& cfg, RandomStream& rng) {
    theta.validate(cfg);
    for (double v : x.pixels)
        if (!std::isfinite(v)) throw std::invalid_argument("corrupt: non-finite pixel in input");

    ImagePatch y = x;
    if (theta.beta_active) {
        const double shape = cfg.B / theta.beta;
        for (auto& v : y.pixels) v *= rng.gamma(shape) / shape;
    }
    if (theta.alpha_active) {
        const double a = theta.alpha;
        for (auto& v : y.pixels) v = a * static_cast<double>(rng.poisson(v / a));
    }
    if (theta.sigma_active) {
        for (auto& v : y.pixels) v += theta.sigma * rng.normal();
    }
    return y;
}

double mse(const ImagePatch& estimate, const ImagePatch& reference) {
    if (estimate.width != reference.width || estimate.height != reference.height)
        throw std::invalid_argument("mse: shape mismatch");
    if (estimate.size() == 0) throw std::invalid_argument("mse: empty patch");
    double acc = 0.0;
    for (std::size_t i = 0; i < estimate.pixels.size(); ++i) {
        const double d = estimate.pixels[i] - reference.pixels[i];
        acc += d * d;
    }
    return acc / static_cast<double>(estimate.size());
}

double psnr(const ImagePatch& estimate, const ImagePatch& reference, bool clip) {
    double err;
    if (clip) {
        ImagePatch clamped = estimate;
        for (auto& v : clamped.pixels) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        err = mse(clamped, reference);
    } else {
        err = mse(estimate, reference);
    }
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / err);
}

}  // namespace specsched
