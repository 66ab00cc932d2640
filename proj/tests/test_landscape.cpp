#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "specsched/landscape.hpp"

using namespace specsched;

namespace {

std::vector<Dimension> unit_box(int n) {
    std::vector<Dimension> dims;
    for (int i = 0; i < n; ++i)
        dims.push_back({"d" + std::to_string(i), 0.0, 1.0, 10, Spacing::Linear});
    return dims;
}

// Generic points in the unit box (normalization is the identity there, so
// fitted coefficients can be compared against the generating polynomial).
std::vector<std::vector<double>> generic_points(int n, int count, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<std::vector<double>> pts(count, std::vector<double>(n));
    for (auto& p : pts)
        for (auto& v : p) v = rng.uniform();
    return pts;
}

// Independent leave-one-out loop via normal equations, for cross-checking
// cross_validate.
double brute_force_loo(const std::vector<std::vector<double>>& pts,
                       const std::vector<double>& y, int degree, double ridge) {
    const int n = static_cast<int>(pts.front().size());
    const auto exps = monomial_exponents(n, degree);
    const int p = static_cast<int>(exps.size());
    const int m = static_cast<int>(pts.size());
    double err = 0.0;
    for (int hold = 0; hold < m; ++hold) {
        Eigen::MatrixXd X(m - 1, p);
        Eigen::VectorXd t(m - 1);
        int row = 0;
        for (int i = 0; i < m; ++i) {
            if (i == hold) continue;
            for (int j = 0; j < p; ++j) {
                double term = 1.0;
                for (int d = 0; d < n; ++d)
                    for (int e = 0; e < exps[j][d]; ++e) term *= pts[i][d];
                X(row, j) = term;
            }
            t(row++) = y[i];
        }
        Eigen::MatrixXd reg = Eigen::MatrixXd::Zero(p, p);
        for (int j = 0; j < p; ++j) {
            const bool intercept =
                std::all_of(exps[j].begin(), exps[j].end(), [](int e) { return e == 0; });
            if (!intercept) reg(j, j) = ridge;
        }
        const Eigen::VectorXd w =
            (X.transpose() * X + reg).ldlt().solve(X.transpose() * t);
        const double pred =
            eval_polynomial(std::vector<double>(w.data(), w.data() + p), exps, pts[hold]);
        err += (pred - y[hold]) * (pred - y[hold]);
    }
    return err / static_cast<double>(m);
}

}  // namespace

TEST_CASE("min_samples") {
    CHECK(min_samples(1) == 4);
    CHECK(min_samples(2) == 7);
    CHECK(min_samples(3) == 11);
    CHECK_THROWS_AS(min_samples(0), std::invalid_argument);
}

TEST_CASE("sparse_design sizes match the 2D/3D protocols") {
    RandomStream rng(17);
    SUBCASE("2D: 4 corners + 10 random = 14") {
        SpecificationSpace space(unit_box(2));
        const auto d = sparse_design(space, 10, rng);
        CHECK(d.size() == 14);
        auto sorted = d;
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
    SUBCASE("3D: 8 corners + 10 random = 18") {
        SpecificationSpace space(unit_box(3));
        CHECK(sparse_design(space, 10, rng).size() == 18);
    }
    SUBCASE("2D boundary: corners + 3 = 7 passes, corners + 2 fails") {
        SpecificationSpace space(unit_box(2));
        CHECK(sparse_design(space, 3, rng).size() == 7);
        CHECK_THROWS_AS(sparse_design(space, 2, rng), std::invalid_argument);
    }
}

TEST_CASE("fit_quadratic recovers a known polynomial exactly") {
    // P(s) = 2*s1^2 - s1*s2 + 3*s2 + 1
    const auto dims = unit_box(2);
    const auto pts = generic_points(2, 7, 100);
    std::vector<double> y;
    for (const auto& p : pts) y.push_back(2.0 * p[0] * p[0] - p[0] * p[1] + 3.0 * p[1] + 1.0);

    const QuadraticModel m = fit_quadratic(dims, pts, y, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(m.predict(pts[i]).value == doctest::Approx(y[i]).epsilon(1e-9));
    CHECK(m.A()[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(m.A()[1] == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(m.A()[2] == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(m.A()[3] == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(m.b()[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(m.b()[1] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(m.c() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("fit_quadratic: constant landscape") {
    const auto dims = unit_box(2);
    const auto pts = generic_points(2, 9, 101);
    const std::vector<double> y(pts.size(), 25.0);
    const QuadraticModel m = fit_quadratic(dims, pts, y, 0.0);
    for (double a : m.A()) CHECK(std::fabs(a) < 1e-9);
    for (double b : m.b()) CHECK(std::fabs(b) < 1e-9);
    CHECK(m.c() == doctest::Approx(25.0).epsilon(1e-10));
}

TEST_CASE("fit_quadratic: exact recovery property for random quadratics") {
    RandomStream coef_rng(555);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 2;
        const auto dims = unit_box(n);
        const auto exps = monomial_exponents(n, 2);
        std::vector<double> coeffs(exps.size());
        for (auto& c : coeffs) c = 2.0 * coef_rng.uniform() - 1.0;
        const auto pts = generic_points(n, min_samples(n) + trial, 200 + trial);
        std::vector<double> y;
        for (const auto& p : pts) y.push_back(eval_polynomial(coeffs, exps, p));
        const QuadraticModel m = fit_quadratic(dims, pts, y, 0.0);
        for (std::size_t i = 0; i < pts.size(); ++i)
            CHECK(m.predict(pts[i]).value ==
                  doctest::Approx(y[i]).epsilon(1e-9).scale(std::max(1.0, std::fabs(y[i]))));
    }
}

TEST_CASE("fit_quadratic error paths") {
    const auto dims = unit_box(2);
    SUBCASE("too few samples") {
        const auto pts = generic_points(2, 6, 103);
        const std::vector<double> y(6, 1.0);
        CHECK_THROWS_AS(fit_quadratic(dims, pts, y, 0.0), std::invalid_argument);
    }
    SUBCASE("degenerate design with ridge 0") {
        auto pts = generic_points(2, 7, 104);
        for (std::size_t i = 1; i < pts.size(); ++i) pts[i] = pts[0];  // all coincident
        const std::vector<double> y(7, 1.0);
        CHECK_THROWS_AS(fit_quadratic(dims, pts, y, 0.0), std::runtime_error);
    }
}

TEST_CASE("ridge monotonicity of the coefficient norm") {
    const auto dims = unit_box(2);
    const auto pts = generic_points(2, 12, 105);
    RandomStream rng(106);
    std::vector<double> y;
    for (const auto& p : pts) y.push_back(5.0 * p[0] - 3.0 * p[1] * p[1] + rng.normal() * 0.1);
    double prev = std::numeric_limits<double>::infinity();
    for (double ridge : {0.0, 1e-5, 1e-3, 1e-1, 1.0, 10.0}) {
        const double norm = fit_quadratic(dims, pts, y, ridge).coefficient_norm();
        CHECK(norm <= prev * (1.0 + 1e-12));
        prev = norm;
    }
}

TEST_CASE("fit is invariant to sample order") {
    const auto dims = unit_box(3);
    auto pts = generic_points(3, 15, 107);
    std::vector<double> y;
    RandomStream rng(108);
    for (const auto& p : pts) y.push_back(p[0] + p[1] * p[2] + rng.normal() * 0.05);
    const QuadraticModel a = fit_quadratic(dims, pts, y, 1e-5);

    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937 g(4);
    std::shuffle(perm.begin(), perm.end(), g);
    std::vector<std::vector<double>> pts2;
    std::vector<double> y2;
    for (auto i : perm) {
        pts2.push_back(pts[i]);
        y2.push_back(y[i]);
    }
    const QuadraticModel b = fit_quadratic(dims, pts2, y2, 1e-5);
    CHECK(a.A() == b.A());
    CHECK(a.b() == b.b());
    CHECK(a.c() == b.c());
}

TEST_CASE("geometric grids have equal consecutive ratios") {
    SpecificationSpace space({{"beta", 1.0, 1024.0, 10, Spacing::Geometric}});
    const double r0 = space.grid_value(0, 1) / space.grid_value(0, 0);
    for (std::size_t b = 1; b + 1 < 10; ++b) {
        const double r = space.grid_value(0, b + 1) / space.grid_value(0, b);
        CHECK(r == doctest::Approx(r0).epsilon(1e-9));
    }
    // endpoints are hit exactly
    CHECK(space.grid_value(0, 0) == doctest::Approx(1.0));
    CHECK(space.grid_value(0, 9) == doctest::Approx(1024.0));
}

TEST_CASE("cross_validate") {
    const auto dims = unit_box(2);
    const auto pts = generic_points(2, 20, 109);

    SUBCASE("noiseless quadratic selects degree 2 over 3") {
        std::vector<double> y;
        for (const auto& p : pts) y.push_back(1.0 + p[0] * p[0] - 2.0 * p[0] * p[1]);
        const auto r = cross_validate(dims, pts, y, {1, 2, 3}, {0.0});
        CHECK(r.degree == 2);
    }
    SUBCASE("noiseless linear selects degree 1") {
        std::vector<double> y;
        for (const auto& p : pts) y.push_back(0.5 + 2.0 * p[0] - p[1]);
        const auto r = cross_validate(dims, pts, y, {1, 2, 3}, {0.0});
        CHECK(r.degree == 1);
    }
    SUBCASE("noisy quadratic: fold errors match a brute-force loop") {
        RandomStream rng(110);
        std::vector<double> y;
        for (const auto& p : pts)
            y.push_back(1.0 + p[0] * p[0] - 2.0 * p[0] * p[1] + rng.normal() * 0.05);
        const std::vector<double> ridges = {0.1, 0.01, 0.001, 0.0001, 0.00001};
        const auto r = cross_validate(dims, pts, y, {2}, ridges);
        for (const auto& [deg, ridge, err] : r.table) {
            const double oracle = brute_force_loo(pts, y, deg, ridge);
            CHECK(err == doctest::Approx(oracle).epsilon(1e-7));
        }
        // argmin of the table is what gets returned
        double best = std::numeric_limits<double>::infinity();
        double best_ridge = -1.0;
        for (const auto& [deg, ridge, err] : r.table)
            if (err < best) {
                best = err;
                best_ridge = ridge;
            }
        CHECK(r.ridge == best_ridge);
    }
    SUBCASE("insufficient samples for LOO") {
        const auto few = generic_points(2, 8, 111);
        const std::vector<double> y(8, 1.0);
        CHECK_THROWS_AS(cross_validate(dims, few, y, {1, 2, 3}, {0.0}), std::invalid_argument);
    }
}

TEST_CASE("predict flags extrapolation") {
    const auto dims = unit_box(2);
    const auto pts = generic_points(2, 9, 112);
    const std::vector<double> y(9, 25.0);
    const QuadraticModel m = fit_quadratic(dims, pts, y, 0.0);
    const std::vector<double> inside = {0.5, 0.5};
    const std::vector<double> outside = {1.5, 0.5};
    CHECK_FALSE(m.predict(inside).extrapolated);
    CHECK(m.predict(inside).value == doctest::Approx(25.0));
    CHECK(m.predict(outside).extrapolated);
}

TEST_CASE("landscape CSV round trip is exact") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "specsched_landscape_rt.csv").string();
    std::vector<LandscapeSample> samples;
    RandomStream rng(113);
    for (int i = 0; i < 5; ++i) {
        LandscapeSample s;
        s.theta.sigma = rng.uniform();
        s.theta.alpha = rng.uniform() * 40.0 + 0.1;
        s.theta.beta = rng.uniform() * 1023.0 + 1.0;
        s.theta.sigma_active = s.theta.alpha_active = s.theta.beta_active = true;
        s.psnr_db = 20.0 + rng.normal();
        s.n_eval = i + 1;
        s.seed = 1000 + i;
        s.source = "ideal";
        samples.push_back(s);
    }
    write_landscape_csv(path, samples, {{"config", "deadbeef"}});
    const auto meta = read_csv_metadata(path);
    REQUIRE(meta.size() == 1);
    CHECK(meta[0].first == "config");
    CHECK(meta[0].second == "deadbeef");
    const auto back = read_landscape_csv(path);
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(back[i].theta.sigma == samples[i].theta.sigma);
        CHECK(back[i].theta.alpha == samples[i].theta.alpha);
        CHECK(back[i].theta.beta == samples[i].theta.beta);
        CHECK(back[i].psnr_db == samples[i].psnr_db);
        CHECK(back[i].n_eval == samples[i].n_eval);
        CHECK(back[i].seed == samples[i].seed);
        CHECK(back[i].source == samples[i].source);
    }
    std::filesystem::remove(path);
}

TEST_CASE("model JSON round trip") {
    std::vector<Dimension> dims = {{"sigma", 0.02, 0.66, 10, Spacing::Geometric},
                                   {"alpha", 0.1, 41.0, 10, Spacing::Geometric}};
    const auto pts = generic_points(2, 10, 114);
    // map unit-box points into the dims box (geometric)
    std::vector<std::vector<double>> mapped;
    for (const auto& p : pts) {
        mapped.push_back({0.02 * std::pow(0.66 / 0.02, p[0]), 0.1 * std::pow(410.0, p[1])});
    }
    std::vector<double> y;
    for (const auto& p : pts) y.push_back(30.0 - 10.0 * p[0] - 5.0 * p[1] * p[1]);
    const QuadraticModel m = fit_quadratic(dims, mapped, y, 1e-5);
    const QuadraticModel back = QuadraticModel::from_json(m.to_json());
    CHECK(back.A() == m.A());
    CHECK(back.b() == m.b());
    CHECK(back.c() == m.c());
    CHECK(back.degree() == m.degree());
    CHECK(back.predict(mapped[0]).value == m.predict(mapped[0]).value);
}
