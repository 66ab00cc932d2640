#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "specsched/noise.hpp"
#include "specsched/rng.hpp"

using namespace specsched;

namespace {

struct SampleStats {
    double mean = 0.0;
    double var = 0.0;
    double m4 = 0.0;  // central fourth moment
    std::size_t n = 0;

    static SampleStats of(const std::vector<double>& xs) {
        SampleStats s;
        s.n = xs.size();
        for (double x : xs) s.mean += x;
        s.mean /= static_cast<double>(s.n);
        for (double x : xs) {
            const double d = x - s.mean;
            s.var += d * d;
            s.m4 += d * d * d * d;
        }
        s.var /= static_cast<double>(s.n - 1);
        s.m4 /= static_cast<double>(s.n);
        return s;
    }

    double stderr_mean() const { return std::sqrt(var / static_cast<double>(n)); }
    double stderr_var() const {
        return std::sqrt(std::max(0.0, m4 - var * var) / static_cast<double>(n));
    }
};

}  // namespace

TEST_CASE("speckle field moments") {
    const SpeckleConfig cfg;
    const std::size_t n = 1'000'000;

    SUBCASE("beta=1 has unit mean") {
        RandomStream rng(42);
        const auto field = sample_speckle_field(n, 1.0, cfg, rng);
        const auto s = SampleStats::of(field);
        CHECK(std::fabs(s.mean - 1.0) < 3.0 * s.stderr_mean());
        for (std::size_t i = 0; i < 100; ++i) CHECK(field[i] > 0.0);
    }
    SUBCASE("beta=B is Exponential(1)") {
        RandomStream rng(43);
        const auto s = SampleStats::of(sample_speckle_field(n, 1024.0, cfg, rng));
        CHECK(std::fabs(s.var - 1.0) < 3.0 * s.stderr_var());
    }
    SUBCASE("beta=32 has variance beta/B") {
        RandomStream rng(44);
        const auto s = SampleStats::of(sample_speckle_field(n, 32.0, cfg, rng));
        CHECK(std::fabs(s.var - 0.03125) < 3.0 * s.stderr_var());
    }
    SUBCASE("beta outside [1,B] rejected") {
        RandomStream rng(45);
        CHECK_THROWS_AS(sample_speckle_field(10, 0.5, cfg, rng), std::invalid_argument);
        CHECK_THROWS_AS(sample_speckle_field(10, 2048.0, cfg, rng), std::invalid_argument);
        CHECK_THROWS_AS(sample_speckle_field(10, std::nan(""), cfg, rng), std::invalid_argument);
    }
}

TEST_CASE("corrupt: identity when all dimensions inactive") {
    RandomStream rng(1);
    ImagePatch x(8, 8);
    for (std::size_t i = 0; i < x.size(); ++i) x.pixels[i] = static_cast<double>(i) / 63.0;
    const Specification theta;  // nothing active
    const ImagePatch y = corrupt(x, theta, SpeckleConfig{}, rng);
    CHECK(y.pixels == x.pixels);
}

TEST_CASE("corrupt: per-stage variance on constant patches") {
    const SpeckleConfig cfg;
    const ImagePatch x(1000, 1000, 0.5);

    SUBCASE("Poisson stage variance is alpha*x") {
        // Adopted convention: y = alpha * Poisson(x/alpha), Var = alpha*x.
        Specification theta = Specification::poisson(0.5);
        theta.sigma_active = true;  // sigma = 0
        theta.beta_active = true;   // beta = 1: adds x^2/B
        RandomStream rng(7);
        const ImagePatch y = corrupt(x, theta, cfg, rng);
        const auto s = SampleStats::of(y.pixels);
        const double expected = 0.5 * 0.5 + 0.25 * 1.0 / cfg.B;
        CHECK(std::fabs(s.var - expected) < 3.0 * s.stderr_var());
    }
    SUBCASE("speckle stage variance is x^2*beta/B") {
        const Specification theta = Specification::speckle(1024.0);
        RandomStream rng(8);
        const ImagePatch y = corrupt(x, theta, cfg, rng);
        const auto s = SampleStats::of(y.pixels);
        CHECK(std::fabs(s.var - 0.25) < 3.0 * s.stderr_var());
    }
    SUBCASE("joint variance decomposition sigma^2 + alpha*x + x^2*beta/B") {
        Specification theta;
        theta.sigma = 0.1;
        theta.alpha = 0.4;
        theta.beta = 64.0;
        theta.sigma_active = theta.alpha_active = theta.beta_active = true;
        RandomStream rng(9);
        const ImagePatch y = corrupt(x, theta, cfg, rng);
        const auto s = SampleStats::of(y.pixels);
        const double expected = 0.01 + 0.4 * 0.5 + 0.25 * 64.0 / 1024.0;
        CHECK(std::fabs(s.var - expected) < 3.0 * s.stderr_var());
        CHECK(std::fabs(s.mean - 0.5) < 4.0 * s.stderr_mean());
    }
}

TEST_CASE("corrupt: unbiasedness per pixel") {
    const SpeckleConfig cfg;
    ImagePatch x(4, 4);
    for (std::size_t i = 0; i < x.size(); ++i) x.pixels[i] = 0.1 + 0.05 * static_cast<double>(i);
    Specification theta;
    theta.sigma = 0.2;
    theta.alpha = 1.5;
    theta.beta = 128.0;
    theta.sigma_active = theta.alpha_active = theta.beta_active = true;

    const int draws = 100'000;
    std::vector<std::vector<double>> per_pixel(x.size());
    for (auto& v : per_pixel) v.reserve(draws);
    for (int d = 0; d < draws; ++d) {
        RandomStream rng = RandomStream::derive(123, 0, d);
        const ImagePatch y = corrupt(x, theta, cfg, rng);
        for (std::size_t i = 0; i < y.size(); ++i) per_pixel[i].push_back(y.pixels[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto s = SampleStats::of(per_pixel[i]);
        CHECK(std::fabs(s.mean - x.pixels[i]) < 4.0 * s.stderr_mean());
    }
}

TEST_CASE("corrupt: determinism under fixed seed") {
    const SpeckleConfig cfg;
    ImagePatch x(16, 16, 0.3);
    Specification theta;
    theta.sigma = 0.1;
    theta.alpha = 0.7;
    theta.beta = 16.0;
    theta.sigma_active = theta.alpha_active = theta.beta_active = true;
    RandomStream a = RandomStream::derive(99, 3, 4);
    RandomStream b = RandomStream::derive(99, 3, 4);
    CHECK(corrupt(x, theta, cfg, a).pixels == corrupt(x, theta, cfg, b).pixels);
}

TEST_CASE("corrupt rejects non-finite input") {
    RandomStream rng(5);
    ImagePatch x(2, 2, 0.5);
    x.pixels[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(corrupt(x, Specification::gaussian(0.1), SpeckleConfig{}, rng),
                    std::invalid_argument);
}

TEST_CASE("psnr") {
    ImagePatch ref(10, 10, 0.5);

    SUBCASE("identical patches give the +infinity sentinel") {
        CHECK(std::isinf(psnr(ref, ref)));
    }
    SUBCASE("constant error 0.1 gives 20 dB") {
        ImagePatch est(10, 10, 0.6);
        CHECK(psnr(est, ref) == doctest::Approx(20.0).epsilon(1e-12));
    }
    SUBCASE("agrees with the MSE definition on random pairs") {
        RandomStream rng(11);
        ImagePatch a(7, 5), b(7, 5);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a.pixels[i] = rng.uniform();
            b.pixels[i] = rng.uniform();
        }
        double direct = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a.pixels[i] - b.pixels[i];
            direct += d * d;
        }
        direct /= static_cast<double>(a.size());
        CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(1.0 / direct)).epsilon(1e-12));
        // loss_from_psnr inverts psnr back to the MSE
        CHECK(loss_from_psnr(psnr(a, b)) == doctest::Approx(direct).epsilon(1e-12));
    }
    SUBCASE("shape mismatch") {
        ImagePatch other(9, 9, 0.5);
        CHECK_THROWS_AS(psnr(other, ref), std::invalid_argument);
    }
}

TEST_CASE("loss_from_psnr") {
    CHECK(loss_from_psnr(20.0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(loss_from_psnr(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // 35.3 dB is the ideal PSNR at (alpha=0.1, sigma=0.02)
    CHECK(loss_from_psnr(35.3) == doctest::Approx(2.951e-4).epsilon(1e-3));
    CHECK(loss_from_psnr(35.3) > 0.0);
}

TEST_CASE("poisson sampler regimes are mean/variance consistent") {
    // Exercises inversion (<10), PTRS (10..1e3), and the normal tail (>1e3).
    for (double rate : {0.3, 4.0, 37.0, 400.0, 2.5e3}) {
        RandomStream rng(static_cast<std::uint64_t>(rate * 1000));
        std::vector<double> xs(200'000);
        for (auto& x : xs) x = static_cast<double>(rng.poisson(rate));
        const auto s = SampleStats::of(xs);
        CHECK(std::fabs(s.mean - rate) < 4.0 * s.stderr_mean());
        CHECK(std::fabs(s.var - rate) < 4.0 * s.stderr_var());
    }
}
