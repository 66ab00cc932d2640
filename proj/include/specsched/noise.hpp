#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "specsched/rng.hpp"

namespace specsched {

// Upper bound on the speckle severity parameter beta. The speckle field is
// Gamma(B/beta, B/beta), so shape = rate = B/beta >= 1 always holds.
struct SpeckleConfig {
    double B = 1024.0;
};

// One point theta = (sigma, alpha, beta) in the noise-parameter space.
// Inactive dimensions hold their no-noise value and the corresponding noise
// stage is skipped entirely.
struct Specification {
    double sigma = 0.0;   // Gaussian std-dev, [0,1]-scale intensity units
    double alpha = 0.0;   // Poisson severity scale
    double beta = 1.0;    // speckle severity, in [1, B]
    bool sigma_active = false;
    bool alpha_active = false;
    bool beta_active = false;

    static Specification gaussian(double sigma);
    static Specification poisson(double alpha);
    static Specification speckle(double beta);

    void validate(const SpeckleConfig& cfg) const;  // throws std::invalid_argument
};

struct ImagePatch {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // row-major, size width*height

    ImagePatch() = default;
    ImagePatch(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t size() const { return pixels.size(); }
    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
};

// i.i.d. Gamma(B/beta, B/beta) multiplicative speckle field; unit mean,
// variance beta/B.
std::vector<double> sample_speckle_field(std::size_t count, double beta,
                                         const SpeckleConfig& cfg, RandomStream& rng);

// Forward model: speckle (multiplicative), then the Poisson stage
// y = alpha * Poisson(x o w / alpha), then additive N(0, sigma^2).
// Conditionally unbiased: E[y | x] = x.
ImagePatch corrupt(const ImagePatch& x, const Specification& theta,
                   const SpeckleConfig& cfg, RandomStream& rng);

double mse(const ImagePatch& estimate, const ImagePatch& reference);

// 10*log10(1/MSE) with peak 1.0; +infinity when MSE == 0. Set clip to
// evaluate on estimates clamped to [0,1] first (off by default so linear
// closed forms match exactly).
double psnr(const ImagePatch& estimate, const ImagePatch& reference, bool clip = false);

inline double loss_from_psnr(double psnr_db) {
    // Inverse of PSNR on [0,1]-scaled MSE.
    return std::pow(10.0, -psnr_db / 10.0);
}

inline double psnr_from_loss(double mse_loss) {
    if (mse_loss <= 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse_loss);
}

}  // namespace specsched
